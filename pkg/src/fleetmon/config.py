"""Plain-text configuration: `key = value` lines, `#` comments, namespaced keys.

The full key list is documented in the README. Unknown keys log a warning and
are ignored so configs stay forward-compatible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .alerts import RuleSet, SlotPolicy, build_rule_set, default_rules
from .manager import CycleConfig
from .model import AlertRule, AlertSeverity, ArchClass
from .simulator import DEFAULT_ARCH_MIX, DEFAULT_CORES_PER_ARCH, FleetConfig

logger = logging.getLogger(__name__)

_ARCH_BY_KEY = {a.name.lower(): a for a in ArchClass}
_SEVERITY_BY_KEY = {s.name.lower(): s for s in AlertSeverity}
_RULE_FIELDS = ("cpu_load_max", "mem_free_min_gb", "disk_free_min_gb")


def parse_config_text(text: str) -> dict[str, str]:
    """Parse `key = value` lines into a flat mapping."""
    out: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"config line {line_no}: expected 'key = value', got {raw!r}")
        out[key.strip()] = value.strip()
    return out


@dataclass
class AppConfig:
    feed_dir: str | None = None
    feed_poll_s: float = 5.0
    staleness_window_s: int = 120
    delta_retention: int = 64
    service_port: int = 8080
    rules: RuleSet = field(default_factory=default_rules)
    slot_policy: SlotPolicy = field(default_factory=SlotPolicy)
    sim: FleetConfig = field(default_factory=FleetConfig)
    sim_max_ticks: int = 0  # 0 = run forever
    sim_tick_wall_s: float | None = None  # wall pacing; None = tick_period_s
    bench_max_nodes: int = 200_000

    @property
    def cycle(self) -> CycleConfig:
        return CycleConfig(staleness_window_s=self.staleness_window_s)

    @classmethod
    def from_file(cls, path: str | Path) -> "AppConfig":
        return cls.from_mapping(parse_config_text(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def from_mapping(cls, raw: dict[str, str]) -> "AppConfig":
        cfg = cls()
        pending = dict(raw)

        def take(key: str, parse, setter) -> None:
            if key in pending:
                setter(parse(pending.pop(key)))

        take("feed.dir", str, lambda v: setattr(cfg, "feed_dir", v))
        take("feed.poll_s", float, lambda v: setattr(cfg, "feed_poll_s", v))
        take("alerts.staleness_window_s", int, lambda v: setattr(cfg, "staleness_window_s", v))
        take("store.delta_retention", int, lambda v: setattr(cfg, "delta_retention", v))
        take("service.port", int, lambda v: setattr(cfg, "service_port", v))
        take("bench.max_nodes", int, lambda v: setattr(cfg, "bench_max_nodes", v))
        take("sim.max_ticks", int, lambda v: setattr(cfg, "sim_max_ticks", v))
        take("sim.tick_wall_s", float, lambda v: setattr(cfg, "sim_tick_wall_s", v))

        cfg.rules = _rules_from(pending)
        cfg.slot_policy = _slots_from(pending)
        cfg.sim = _sim_from(pending)
        for key in pending:
            logger.warning("ignoring unknown config key %r", key)
        return cfg


def _rules_from(pending: dict[str, str]) -> RuleSet:
    overrides: dict[tuple[ArchClass, AlertSeverity], dict[str, float]] = {}
    for key in list(pending):
        parts = key.split(".")
        if len(parts) != 4 or parts[0] != "alerts":
            continue
        _, arch_key, sev_key, fld = parts
        if arch_key not in _ARCH_BY_KEY or sev_key not in _SEVERITY_BY_KEY or fld not in _RULE_FIELDS:
            continue
        value = float(pending.pop(key))
        overrides.setdefault((_ARCH_BY_KEY[arch_key], _SEVERITY_BY_KEY[sev_key]), {})[fld] = value
    base = default_rules()
    if not overrides:
        return base
    rules = []
    for (arch, severity), rule in base.items():
        fields = rule._asdict()
        fields.update(overrides.pop((arch, severity), {}))
        rules.append(AlertRule(**fields))
    for (arch, severity), partial in overrides.items():
        defaults = {"cpu_load_max": 1.0, "mem_free_min_gb": 0.0, "disk_free_min_gb": 0.0}
        defaults.update(partial)
        rules.append(AlertRule(arch=arch, severity=severity, **defaults))
    return build_rule_set(rules)


def _slots_from(pending: dict[str, str]) -> SlotPolicy:
    kwargs: dict = {}
    if "slots.default_limit" in pending:
        kwargs["default_limit"] = int(pending.pop("slots.default_limit"))
    if "slots.special_limit" in pending:
        kwargs["special_limit"] = int(pending.pop("slots.special_limit"))
    if "slots.legacy_default" in pending:
        kwargs["legacy_default"] = int(pending.pop("slots.legacy_default"))
    if "slots.special_users" in pending:
        users = [u.strip() for u in pending.pop("slots.special_users").split(",") if u.strip()]
        kwargs["special_users"] = frozenset(users)
    return SlotPolicy(**kwargs)


def _sim_from(pending: dict[str, str]) -> FleetConfig:
    kwargs: dict = {}
    simple = {
        "sim.node_count": ("node_count", int),
        "sim.sensor_count": ("sensor_count", int),
        "sim.seed": ("seed", int),
        "sim.scale_factor": ("scale_factor", float),
        "sim.fault_rate": ("fault_rate", float),
        "sim.tick_period_s": ("tick_period_s", int),
        "sim.job_churn": ("job_churn", float),
        "sim.job_count": ("job_count", int),
        "sim.cpu_step": ("cpu_step", float),
        "sim.mem_step": ("mem_step", float),
        "sim.disk_step": ("disk_step", float),
        "sim.sensor_step_scale": ("sensor_step_scale", float),
        "sim.reversion": ("reversion", float),
        "sim.recovery_rate": ("recovery_rate", float),
    }
    for key, (name, parse) in simple.items():
        if key in pending:
            kwargs[name] = parse(pending.pop(key))
    mix = dict(DEFAULT_ARCH_MIX)
    mix_seen = False
    cores = dict(DEFAULT_CORES_PER_ARCH)
    for arch_key, arch in _ARCH_BY_KEY.items():
        mk = f"sim.arch_mix.{arch_key}"
        if mk in pending:
            mix[arch] = float(pending.pop(mk))
            mix_seen = True
        ck = f"sim.cores.{arch_key}"
        if ck in pending:
            cores[arch] = int(pending.pop(ck))
    if mix_seen:
        kwargs["arch_mix"] = mix
    if cores != DEFAULT_CORES_PER_ARCH:
        kwargs["cores_per_arch"] = cores
    return FleetConfig(**kwargs)
