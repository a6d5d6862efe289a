"""fleetmon: fleet telemetry pipeline with a single-manager update cycle.

Feeds -> keyed versioned snapshot store -> sequential three-phase update
cycle -> alerts/analytics -> HTTP console API, plus a benchmark harness
contrasting the managed cycle with per-entity, staggered and chunked
scheduling.
"""

from .alerts import (
    AdmissionDecision,
    RuleSet,
    SlotPolicy,
    admit_job,
    build_rule_set,
    compute_analytics,
    default_rules,
    evaluate_thresholds,
)
from .ingest import (
    FeedWatcher,
    ParseIssue,
    UpdateBatch,
    parse_job_csv,
    parse_node_csv,
    parse_sensor_csv,
    serialize_job_csv,
    serialize_node_csv,
    serialize_sensor_csv,
)
from .manager import (
    MANAGED,
    PER_ENTITY,
    STAGGERED,
    CycleConfig,
    UpdateReport,
    UpdateStrategy,
    chunked,
    run_cycle,
    run_cycle_legacy,
    run_cycle_managed,
    startup_load,
)
from .model import (
    Alert,
    AlertDimension,
    AlertRule,
    AlertSeverity,
    AppearanceState,
    ArchClass,
    EntityId,
    EntityKind,
    JobRecord,
    NodeRecord,
    NodeStatus,
    SensorKind,
    SensorRecord,
    SystemAnalytics,
    derive_appearance,
)
from .simulator import FleetConfig, FleetSimulator, generate_fleet
from .store import (
    FleetSnapshot,
    InvalidCursorError,
    NodeBundle,
    OutOfOrderBatchError,
    StateStore,
    StoreNotEmptyError,
)

__version__ = "0.1.0"
