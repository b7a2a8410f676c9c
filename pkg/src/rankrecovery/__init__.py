"""Rank-based multiple-fault recovery for homogeneous clusters.

Phase 1 levels the surviving nodes' loads by pairing the most and least
loaded nodes (:func:`redistribute`); phase 2 drains the failed nodes' jobs
and new arrivals onto the least-loaded node (:func:`allocate_pending_jobs`).
:func:`run_scenario` simulates both phases against a static baseline.
"""

from .cluster import ClusterState, ComputeNode, Job, NodeStatus, Origin, imbalance, mark_failed, total_alive_load
from .config import ScenarioConfig, load_config
from .detection import HeartbeatLedger, detect_failures, record_heartbeat
from .errors import (
    AlreadyFailed,
    ConfigMismatch,
    CorruptLog,
    EmptyTable,
    InstanceTooLarge,
    InvalidSize,
    NoAliveNodes,
    NotConverged,
    ParseError,
    RecoveryError,
    UnknownNode,
    UnsupportedFormat,
    ValidationError,
)
from .kernels import BACKEND
from .ranking import RankEntry, RankTable, build_rank_table, get_least_rank_node, update_after_assignment
from .reassignment import Assignment, QueuePolicy, allocate_pending_jobs, enqueue_arrival
from .redistribution import RedistributionReport, Transfer, message_count, pairing_pass, redistribute
from .report import ScenarioFailure, export_report, load_reports, run_batch
from .simulator import ResponseModel, ScenarioReport, replay, run_scenario

__version__ = "0.1.0"
