"""Continuous QoS-aware orchestration of multi-service applications over
simulated cloud-edge infrastructures: descriptor parsing, incremental
placement reasoning, a leader/follower monitoring overlay, diff-based
reconciliation with pluggable backends, a polling watcher, and a CLI + HTTP
gateway."""

from .descriptors import (
    merge_spec,
    parse_compose,
    parse_requirements,
    spec_from_texts,
)
from .model import (
    AllocationLedger,
    ApplicationSpec,
    InfrastructureSnapshot,
    LinkRequirement,
    LinkState,
    NodeState,
    Placement,
    ServiceRequirement,
    parse_report,
    serialize_report,
)
from .reasoner import (
    ReasoningOutcome,
    Violation,
    ViolationKind,
    continuous_step,
    search,
    validate,
)
from .reconciler import (
    ActionPlan,
    CommandScriptBackend,
    SimulatedBackend,
    diff,
    render_commands,
)
from .overlay import Monitor, OverlayState, estimate_qos, join, restructure
from .dynamics import (
    CommitModel,
    PerturbationModel,
    build_testbed,
    generate_commit,
    perturb,
)
from .orchestrator import Core
from .scenario import ScenarioConfig, ScenarioLog, run_scenario

__version__ = "0.1.0"
