"""Domain type invariants and the appearance precedence contract."""

from __future__ import annotations

import random

import pytest

from fleetmon.model import (
    Alert,
    AlertDimension,
    AlertSeverity,
    AppearanceState,
    ArchClass,
    EntityId,
    EntityKind,
    NodeRecord,
    NodeStatus,
    check_job_record,
    check_node_record,
    check_sensor_record,
    derive_appearance,
    valid_name,
)
from fleetmon.model import JobRecord, SensorKind, SensorRecord


def make_node(
    name="n0001",
    arch=ArchClass.KNL,
    timestamp=1_700_000_000,
    cpu_load=0.5,
    mem_free_gb=90.0,
    disk_free_gb=800.0,
    jobs_running=2,
    cores_busy=32,
    cores_total=64,
    status=NodeStatus.UP,
) -> NodeRecord:
    return NodeRecord(
        EntityId(name, EntityKind.NODE),
        arch,
        timestamp,
        cpu_load,
        mem_free_gb,
        disk_free_gb,
        jobs_running,
        cores_busy,
        cores_total,
        status,
    )


def make_alert(record: NodeRecord, severity: AlertSeverity) -> Alert:
    return Alert(
        record.id,
        record.arch,
        AlertDimension.CPU_LOAD,
        severity,
        0.99,
        0.95,
        record.timestamp,
    )


NOW = 1_700_000_000
WINDOW = 120


def test_down_wins_over_everything():
    record = make_node(status=NodeStatus.DOWN, jobs_running=0)
    assert derive_appearance(record, [], NOW, WINDOW) is AppearanceState.DOWN
    alerts = [make_alert(record, AlertSeverity.CRITICAL)]
    assert derive_appearance(record, alerts, NOW, WINDOW) is AppearanceState.DOWN


def test_critical_beats_warning_when_fresh():
    record = make_node()
    alerts = [make_alert(record, AlertSeverity.CRITICAL), make_alert(record, AlertSeverity.WARNING)]
    assert derive_appearance(record, alerts, NOW, WINDOW) is AppearanceState.ALERT


def test_warning_only_and_ok():
    record = make_node()
    assert derive_appearance(record, [], NOW, WINDOW) is AppearanceState.OK
    alerts = [make_alert(record, AlertSeverity.WARNING)]
    assert derive_appearance(record, alerts, NOW, WINDOW) is AppearanceState.WARNING


def test_stale_masks_alerts_but_not_down():
    record = make_node(timestamp=NOW - WINDOW - 1)
    alerts = [make_alert(record, AlertSeverity.CRITICAL)]
    assert derive_appearance(record, alerts, NOW, WINDOW) is AppearanceState.STALE
    exactly_at_window = make_node(timestamp=NOW - WINDOW)
    assert derive_appearance(exactly_at_window, [], NOW, WINDOW) is AppearanceState.OK


def _oracle_appearance(record, alerts, now, window):
    """Independent restatement of the five-way precedence."""
    severities = {a.severity for a in alerts}
    if record.status_reported == NodeStatus.DOWN:
        return AppearanceState.DOWN
    elif (now - record.timestamp) > window:
        return AppearanceState.STALE
    elif AlertSeverity.CRITICAL in severities:
        return AppearanceState.ALERT
    elif AlertSeverity.WARNING in severities:
        return AppearanceState.WARNING
    else:
        return AppearanceState.OK


def _random_case(rng: random.Random):
    status = NodeStatus.DOWN if rng.random() < 0.3 else NodeStatus.UP
    record = make_node(
        timestamp=NOW - rng.randrange(0, 4 * WINDOW),
        jobs_running=0 if status is NodeStatus.DOWN else rng.randrange(0, 4),
        status=status,
    )
    alerts = [
        make_alert(record, rng.choice([AlertSeverity.WARNING, AlertSeverity.CRITICAL]))
        for _ in range(rng.randrange(0, 4))
    ]
    return record, alerts


def test_precedence_matches_oracle_on_random_records():
    rng = random.Random(42)
    for _ in range(200):
        record, alerts = _random_case(rng)
        assert derive_appearance(record, alerts, NOW, WINDOW) is _oracle_appearance(
            record, alerts, NOW, WINDOW
        )


def test_deterministic_and_total():
    rng = random.Random(7)
    cases = [_random_case(rng) for _ in range(10_000)]
    first = [derive_appearance(r, a, NOW, WINDOW) for r, a in cases]
    again = [derive_appearance(r, a, NOW, WINDOW) for r, a in cases]
    assert first == again


def test_adding_alerts_never_lowers_severity_rank():
    rank = {AppearanceState.OK: 0, AppearanceState.WARNING: 1, AppearanceState.ALERT: 2}
    rng = random.Random(13)
    for _ in range(300):
        record, alerts = _random_case(rng)
        before = derive_appearance(record, alerts, NOW, WINDOW)
        extra = make_alert(record, rng.choice([AlertSeverity.WARNING, AlertSeverity.CRITICAL]))
        after = derive_appearance(record, alerts + [extra], NOW, WINDOW)
        if before in rank:  # DOWN/STALE are decided before alerts
            assert rank[after] >= rank[before]
        else:
            assert after is before


def test_valid_name_rules():
    assert valid_name("n0421")
    assert valid_name("pod-temp-03")
    assert not valid_name("")
    assert not valid_name("a,b")
    assert not valid_name("a b")
    assert not valid_name("a\tb")
    assert not valid_name("a\nb")


def test_node_record_invariants():
    assert check_node_record(make_node()) is None
    assert check_node_record(make_node(cores_busy=70, cores_total=64)) is not None
    assert check_node_record(make_node(status=NodeStatus.DOWN, jobs_running=1)) is not None
    assert check_node_record(make_node(status=NodeStatus.DOWN, jobs_running=0)) is None
    assert check_node_record(make_node(cpu_load=-0.1)) is not None
    assert check_node_record(make_node(cores_total=0)) is not None


def test_sensor_record_invariants():
    ok = SensorRecord(
        EntityId("pod-hum-01", EntityKind.SENSOR), "zoneA", SensorKind.HUMIDITY_PCT, NOW, 55.0
    )
    assert check_sensor_record(ok) is None
    bad = ok._replace(value=250.0)
    assert check_sensor_record(bad) is not None
    airflow = ok._replace(kind=SensorKind.AIRFLOW_CFM, value=-1.0)
    assert check_sensor_record(airflow) is not None
    temp_below_zero = ok._replace(kind=SensorKind.TEMPERATURE_C, value=-5.0)
    assert check_sensor_record(temp_below_zero) is None


def test_job_record_invariants():
    ok = JobRecord("j00001", "u01", ArchClass.KNL, 128, ("n0001", "n0002"))
    assert check_job_record(ok) is None
    assert check_job_record(ok._replace(node_ids=())) is not None
    assert check_job_record(ok._replace(slots=1)) is not None  # fewer slots than nodes
    assert check_job_record(ok._replace(slots=0)) is not None


@pytest.mark.parametrize("arch", list(ArchClass))
def test_arch_class_is_closed_set(arch):
    assert arch.name in ("AMD", "INTEL", "KNL", "GPU")
    assert len(ArchClass) == 4
