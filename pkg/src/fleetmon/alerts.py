"""Per-architecture threshold evaluation, fleet analytics, job-slot admission.

All functions here are pure and callable from any thread.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, NamedTuple

from .model import (
    ARCH_ORDER,
    STATE_ORDER,
    Alert,
    AlertDimension,
    AlertRule,
    AlertSeverity,
    AppearanceState,
    ArchClass,
    JobRecord,
    NodeRecord,
    NodeStatus,
    SystemAnalytics,
)

RuleSet = dict[tuple[ArchClass, AlertSeverity], AlertRule]

# Severity-then-dimension order in which alerts for one node are listed.
SEVERITY_ORDER = (AlertSeverity.WARNING, AlertSeverity.CRITICAL)
DIMENSION_ORDER = (AlertDimension.CPU_LOAD, AlertDimension.MEM_FREE, AlertDimension.DISK_FREE)


def build_rule_set(rules: Iterable[AlertRule]) -> RuleSet:
    """Index rules by (arch, severity), rejecting duplicates."""
    out: RuleSet = {}
    for rule in rules:
        if rule.cpu_load_max <= 0:
            raise ValueError(f"cpu_load_max must be > 0 in {rule}")
        if rule.mem_free_min_gb < 0 or rule.disk_free_min_gb < 0:
            raise ValueError(f"free-space thresholds must be >= 0 in {rule}")
        key = (rule.arch, rule.severity)
        if key in out:
            raise ValueError(f"duplicate rule for {rule.arch.name}/{rule.severity.name}")
        out[key] = rule
    return out


def default_rules() -> RuleSet:
    """Shipped configuration defaults, identical for every architecture.

    These are placeholders meant to be overridden in the config file; they
    are not derived from any production fleet.
    """
    rules = []
    for arch in ARCH_ORDER:
        rules.append(AlertRule(arch, 0.95, 8.0, 20.0, AlertSeverity.WARNING))
        rules.append(AlertRule(arch, 0.99, 2.0, 5.0, AlertSeverity.CRITICAL))
    return build_rule_set(rules)


def evaluate_thresholds(
    record: NodeRecord,
    rules: RuleSet,
    now: int,
    staleness_window: int,
) -> list[Alert]:
    """Evaluate one node against its architecture's rules.

    Violations are strict inequalities (a metric exactly at its threshold is
    healthy). A silent node additionally raises a STALE warning regardless of
    configured rules. A node reporting Down raises nothing: down masks
    threshold noise.
    """
    if record.status_reported is NodeStatus.DOWN:
        return []
    alerts: list[Alert] = []
    for severity in SEVERITY_ORDER:
        rule = rules.get((record.arch, severity))
        if rule is None:
            continue
        checks = (
            (AlertDimension.CPU_LOAD, record.cpu_load > rule.cpu_load_max, record.cpu_load, rule.cpu_load_max),
            (AlertDimension.MEM_FREE, record.mem_free_gb < rule.mem_free_min_gb, record.mem_free_gb, rule.mem_free_min_gb),
            (AlertDimension.DISK_FREE, record.disk_free_gb < rule.disk_free_min_gb, record.disk_free_gb, rule.disk_free_min_gb),
        )
        for dimension, violated, observed, threshold in checks:
            if violated:
                alerts.append(
                    Alert(record.id, record.arch, dimension, severity, float(observed), float(threshold), now)
                )
    age = now - record.timestamp
    if age > staleness_window:
        alerts.append(
            Alert(
                record.id,
                record.arch,
                AlertDimension.STALE,
                AlertSeverity.WARNING,
                float(age),
                float(staleness_window),
                now,
            )
        )
    return alerts


_UTILIZED_STATES = (AppearanceState.OK, AppearanceState.WARNING, AppearanceState.ALERT)


def compute_analytics(
    bundles: Iterable[tuple[NodeRecord, AppearanceState, tuple[Alert, ...]]],
    jobs: Mapping[str, JobRecord],
) -> SystemAnalytics:
    """Aggregate fleet state: per-arch appearance counts, utilization over
    up-and-fresh nodes, active alert counts, per-user slot usage.

    This is the plain row-at-a-time aggregation; the update manager's
    vectorized phase must agree with it exactly.
    """
    state_counts = {a: {s: 0 for s in STATE_ORDER} for a in ARCH_ORDER}
    busy = total = 0
    alert_counts = {sev: 0 for sev in AlertSeverity}
    for record, state, alerts in bundles:
        state_counts[record.arch][state] += 1
        if state in _UTILIZED_STATES:
            busy += record.cores_busy
            total += record.cores_total
        for alert in alerts:
            alert_counts[alert.severity] += 1
    per_user: dict[str, int] = {}
    for job in jobs.values():
        per_user[job.user] = per_user.get(job.user, 0) + job.slots
    return SystemAnalytics(
        state_counts=state_counts,
        total_jobs=len(jobs),
        fleet_utilization=busy / total if total else 0.0,
        active_alerts=alert_counts,
        per_user_slots=per_user,
    )


@dataclass(frozen=True)
class SlotPolicy:
    """Per-run core-slot limits. default_limit applies to everyone; users in
    special_users may request up to special_limit. legacy_default is kept for
    comparison runs against the pre-expansion policy."""

    default_limit: int = 8192
    special_limit: int = 16384
    special_users: frozenset[str] = frozenset()
    legacy_default: int = 2048

    def __post_init__(self) -> None:
        if self.default_limit > self.special_limit:
            raise ValueError("default_limit must be <= special_limit")

    def with_legacy_default(self) -> "SlotPolicy":
        """A copy whose active default limit is the legacy one."""
        return replace(self, default_limit=self.legacy_default)


class AdmissionDecision(NamedTuple):
    admitted: bool
    limit: int
    reason: str | None

    def __bool__(self) -> bool:
        return self.admitted


def admit_job(
    request: JobRecord,
    per_user_slots: Mapping[str, int],
    policy: SlotPolicy,
) -> AdmissionDecision:
    """Admit or reject a job request against the slot policy.

    Semantics are per single run: only the request's own slot count is
    checked against the user's limit. per_user_slots (current usage) is
    accepted for interface stability and reporting but does not cumulate
    into the decision.
    """
    del per_user_slots
    limit = policy.special_limit if request.user in policy.special_users else policy.default_limit
    if request.slots <= limit:
        return AdmissionDecision(True, limit, None)
    return AdmissionDecision(
        False, limit, f"requested {request.slots} slots; limit for {request.user} is {limit}"
    )
