"""Deterministic discrete-event simulation of recovery versus a static baseline.

Each scenario runs twice:

``recovered``
    Balances the initial allocation at tick 0, then on every detected failure
    moves the failed node's work onto the failure queue and, one tick later,
    redistributes the surviving loads and drains the queues greedily. New
    arrivals go to the least-loaded node (or wait for a pending recovery).

``baseline``
    Keeps the initial allocation as-is. Arrivals are dealt round-robin in
    node order. A failed node's remaining work either stalls forever or is
    handed to one configured successor.

Every alive node processes ``rate`` work units per tick. The response time
of a run is the tick at which its last unit completes plus
``fixed_overhead``; stalled work makes it unbounded (``None``).

Both runs are written to one line-delimited JSON event log. The header holds
the canonical config and its hash, the footer the record count and a digest,
so :func:`replay` can detect truncation, tampering and config drift.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Sequence

from . import config as config_mod
from .cluster import ClusterState, mark_failed
from .config import BaselinePolicy, ScenarioConfig
from .detection import HeartbeatLedger, detect_failures, record_heartbeat
from .errors import ConfigMismatch, CorruptLog, NoAliveNodes, RecoveryError
from .ranking import build_rank_table
from .reassignment import Assignment, allocate_pending_jobs, enqueue_arrival
from .redistribution import RedistributionReport, Transfer, redistribute

LOG_SCHEMA_VERSION = 1


class EventKind(str, Enum):
    JOB_ARRIVAL = "JobArrival"
    NODE_FAILURE = "NodeFailure"
    HEARTBEAT = "Heartbeat"
    DETECTION_CHECK = "DetectionCheck"
    RECOVERY_TRIGGER = "RecoveryTrigger"
    UNIT_PROCESSED = "UnitProcessed"
    # log-only records
    DETECTED = "Detected"
    TRANSFER = "Transfer"
    REDISTRIBUTED = "Redistributed"
    ASSIGNMENT = "Assignment"
    STALLED = "Stalled"


@dataclass(order=True, frozen=True)
class Event:
    time: int
    seq: int
    kind: EventKind = field(compare=False)
    payload: dict = field(compare=False, default_factory=dict)


@dataclass(frozen=True)
class ResponseModel:
    rate: int = 1
    fixed_overhead: int = 0

    def __post_init__(self) -> None:
        if self.rate < 1 or self.fixed_overhead < 0:
            raise ValueError("rate must be >= 1 and fixed_overhead >= 0")

    def makespan(self, loads: Sequence[int]) -> int:
        """Static formula: slowest node's ceil(load / rate) plus overhead."""
        return max((-(-load // self.rate) for load in loads), default=0) + self.fixed_overhead


@dataclass(frozen=True)
class ScenarioReport:
    scenario_id: str
    config_hash: str
    response_time_recovered: int | None
    response_time_baseline: int | None
    improvement_ratio: float
    redistribution: RedistributionReport
    assignments: tuple[Assignment, ...]
    detection_latency: int
    recovery_episodes: int
    units_processed: int
    total_work: int
    event_log: str

    @property
    def baseline_stalled(self) -> bool:
        return self.response_time_baseline is None

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario_id": self.scenario_id,
            "config_hash": self.config_hash,
            "response_time_recovered": self.response_time_recovered,
            "response_time_baseline": self.response_time_baseline,
            "improvement_ratio": _ratio_out(self.improvement_ratio),
            "redistribution": self.redistribution.to_dict(),
            "assignments": [a.to_dict() for a in self.assignments],
            "detection_latency": self.detection_latency,
            "recovery_episodes": self.recovery_episodes,
            "units_processed": self.units_processed,
            "total_work": self.total_work,
            "event_log": self.event_log,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ScenarioReport:
        return cls(
            scenario_id=data["scenario_id"],
            config_hash=data["config_hash"],
            response_time_recovered=data["response_time_recovered"],
            response_time_baseline=data["response_time_baseline"],
            improvement_ratio=float(data["improvement_ratio"]),
            redistribution=RedistributionReport.from_dict(data["redistribution"]),
            assignments=tuple(Assignment(**a) for a in data["assignments"]),
            detection_latency=data["detection_latency"],
            recovery_episodes=data["recovery_episodes"],
            units_processed=data["units_processed"],
            total_work=data["total_work"],
            event_log=data["event_log"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def _ratio_out(x: float) -> float | str:
    # JSON has no infinity literal
    return "inf" if math.isinf(x) else x


def improvement_ratio(baseline: int | None, recovered: int) -> float:
    if baseline is None:
        return math.inf
    if recovered == 0:
        return 1.0 if baseline == 0 else math.inf
    return baseline / recovered


class _Run:
    """One simulated execution of a scenario in a single mode."""

    def __init__(self, cfg: ScenarioConfig, mode: str, arrivals: list[tuple[int, int]]) -> None:
        self.cfg = cfg
        self.mode = mode
        self.recovering = mode == "recovered"
        self.state = ClusterState.from_loads(cfg.loads, cfg.job_map())
        self.ledger = HeartbeatLedger.register(cfg.node_ids, 0, cfg.period, cfg.miss_threshold)
        self.heap: list[Event] = []
        self.seq = 0
        self.now = 0
        self.records: list[tuple[int, str, dict]] = []
        self.crashed: dict[int, int] = {}
        self.detected: dict[int, int] = {}
        self.check_pending: set[int] = set()
        self.pending_failures = len(cfg.failures)
        self.recovery_pending = False
        self.finish = 0
        self.units_processed = 0
        self.rr = 0
        self.passes = 0
        self.messages = 0
        self.transfers: list[Transfer] = []
        self.final_spread = 0
        self.converged = True
        self.episodes = 0
        self.assignments: list[Assignment] = []

        if self.recovering:
            self._schedule(0, EventKind.RECOVERY_TRIGGER, {"reason": "initial"})
            self.recovery_pending = True
        for tick, node in cfg.failures:
            self._schedule(tick, EventKind.NODE_FAILURE, {"node": node})
        for tick, size in arrivals:
            self._schedule(tick, EventKind.JOB_ARRIVAL, {"size": size})
        for node in cfg.node_ids:
            self._schedule(0, EventKind.HEARTBEAT, {"node": node})

    def _schedule(self, time: int, kind: EventKind, payload: dict) -> None:
        heapq.heappush(self.heap, Event(time, self.seq, kind, payload))
        self.seq += 1

    def _log(self, kind: EventKind, payload: dict) -> None:
        self.records.append((self.now, kind.value, payload))

    def _monitoring(self) -> bool:
        # heartbeats only matter while some failure may still be detected
        return self.pending_failures > 0 or len(self.crashed) > len(self.detected)

    def _working(self):
        for n in self.state.nodes:
            if n.alive and n.load and n.id not in self.crashed:
                yield n

    def _advance(self, until: int) -> None:
        span = until - self.now
        if span <= 0:
            return
        budget = self.cfg.rate * span
        for n in list(self._working()):
            units = min(n.load, budget)
            if units == n.load:
                self.finish = max(self.finish, self.now + -(-n.load // self.cfg.rate))
            self.state = self.state.replace_node(n.processed(units))
            self.units_processed += units
            self._log(EventKind.UNIT_PROCESSED, {"node": n.id, "units": units, "ticks": span})
        self.now = until

    def run(self) -> None:
        while self.heap:
            ev = heapq.heappop(self.heap)
            self._advance(ev.time)
            getattr(self, "_on_" + ev.kind.name.lower())(ev.payload)
        # drain whatever work is left with no further events
        for n in list(self._working()):
            self.finish = max(self.finish, self.now + -(-n.load // self.cfg.rate))
            self.units_processed += n.load
            self._log(EventKind.UNIT_PROCESSED, {"node": n.id, "units": n.load, "ticks": None})
            self.state = self.state.replace_node(n.processed(n.load))

    def _on_node_failure(self, p: dict) -> None:
        self.pending_failures -= 1
        self.crashed[p["node"]] = self.now
        self._log(EventKind.NODE_FAILURE, p)

    def _on_heartbeat(self, p: dict) -> None:
        node = p["node"]
        if node in self.crashed or not self._monitoring():
            return
        self.ledger = record_heartbeat(self.ledger, node, self.now)
        self._log(EventKind.HEARTBEAT, p)
        if node not in self.check_pending:
            self.check_pending.add(node)
            self._schedule(self.ledger.suspect_at(node), EventKind.DETECTION_CHECK, {"node": node})
        self._schedule(self.now + self.cfg.period, EventKind.HEARTBEAT, p)

    def _on_detection_check(self, p: dict) -> None:
        node = p["node"]
        self.check_pending.discard(node)
        if not self._monitoring():
            return
        suspects = sorted(detect_failures(self.ledger, self.now) - self.detected.keys())
        for nid in suspects:
            self.detected[nid] = self.now
            latency = self.now - self.crashed.get(nid, self.now)
            self._log(EventKind.DETECTED, {"node": nid, "latency": latency})
            self._fail(nid)
        if node not in self.detected:
            self.check_pending.add(node)
            self._schedule(self.ledger.suspect_at(node), EventKind.DETECTION_CHECK, {"node": node})
        if suspects and self.recovering and not self.recovery_pending:
            self.recovery_pending = True
            self._schedule(self.now + 1, EventKind.RECOVERY_TRIGGER,
                           {"reason": "failure", "nodes": suspects})

    def _fail(self, node: int) -> None:
        self.state = mark_failed(self.state, node)
        if self.recovering:
            return
        cfg = self.cfg
        target = cfg.baseline_successor
        if (
            cfg.baseline_policy is BaselinePolicy.SUCCESSOR
            and target is not None
            and self.state.node(target).alive
        ):
            self._assign_static(target)
        else:
            stuck = sum(j.size for j in self.state.failure_queue)
            self._log(EventKind.STALLED, {"node": node, "units": stuck})

    def _on_job_arrival(self, p: dict) -> None:
        self.state = enqueue_arrival(self.state, p["size"], self.now)
        self._log(EventKind.JOB_ARRIVAL, p)
        if self.recovering:
            if not self.recovery_pending:
                self._allocate()
            return
        alive = [n.id for n in self.state.nodes if n.alive]
        if not alive:
            return  # stays queued, counted as stalled
        target = alive[self.rr % len(alive)]
        self.rr += 1
        self._assign_static(target, arrivals_only=True)

    def _assign_static(self, target: int, arrivals_only: bool = False) -> None:
        """Baseline placement: everything queued (or just arrivals) goes to ``target``."""
        queue = self.state.arrival_queue if arrivals_only else (
            self.state.failure_queue + self.state.arrival_queue
        )
        node = self.state.node(target)
        load = node.load
        seq = self.state.next_seq
        for job in queue:
            a = Assignment(job.id, target, load, load + job.size, seq)
            node = node.with_delta(job.size)
            load += job.size
            seq += 1
            self._log(EventKind.ASSIGNMENT, a.to_dict())
        state = self.state.replace_node(node)
        if arrivals_only:
            self.state = replace(state, arrival_queue=(), next_seq=seq)
        else:
            self.state = replace(state, failure_queue=(), arrival_queue=(), next_seq=seq)

    def _on_recovery_trigger(self, p: dict) -> None:
        self.recovery_pending = False
        self.episodes += 1
        self._log(EventKind.RECOVERY_TRIGGER, p)
        if not self.state.alive_nodes():
            raise NoAliveNodes(f"{self.cfg.scenario_id}: every node has failed")
        self.state, report = redistribute(self.state, self.cfg.epsilon, self.cfg.max_passes)
        for t in report.transfers:
            self._log(EventKind.TRANSFER, t.to_dict())
        self._log(EventKind.REDISTRIBUTED, {
            "passes": report.passes,
            "messages": report.messages,
            "spread": report.final_spread,
            "converged": report.converged,
        })
        self.passes += report.passes
        self.messages += report.messages
        self.transfers.extend(report.transfers)
        self.final_spread = report.final_spread
        self.converged = self.converged and report.converged
        self._allocate()

    def _allocate(self) -> None:
        if not (self.state.failure_queue or self.state.arrival_queue):
            return
        if not self.state.alive_nodes():
            raise NoAliveNodes(f"{self.cfg.scenario_id}: jobs pending with no alive node")
        table = build_rank_table(self.state)
        self.state, _, done = allocate_pending_jobs(self.state, table, self.cfg.queue_policy)
        for a in done:
            self._log(EventKind.ASSIGNMENT, a.to_dict())
        self.assignments.extend(done)

    @property
    def stalled_units(self) -> int:
        queued = self.state.failure_queue + self.state.arrival_queue
        return sum(j.size for j in queued) + sum(
            n.load for n in self.state.nodes if n.id in self.crashed
        )

    def response(self) -> int | None:
        if self.stalled_units:
            return None
        return self.finish + self.cfg.fixed_overhead

    def redistribution_report(self) -> RedistributionReport:
        return RedistributionReport(
            passes=self.passes,
            transfers=tuple(self.transfers),
            messages=self.messages,
            final_spread=self.final_spread,
            total_moved=sum(t.load_to_transfer for t in self.transfers),
            converged=self.converged,
        )


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _format_log(cfg: ScenarioConfig, runs: Sequence[_Run]) -> str:
    lines = []
    seq = 0
    for run in runs:
        for time, kind, payload in run.records:
            lines.append(_dumps(
                {"record": "event", "mode": run.mode, "time": time, "seq": seq,
                 "kind": kind, "payload": payload}
            ))
            seq += 1
    digest = hashlib.sha256("\n".join(lines).encode()).hexdigest()
    header = _dumps({
        "record": "header",
        "schema_version": LOG_SCHEMA_VERSION,
        "config_hash": cfg.config_hash(),
        "config": cfg.to_dict(),
    })
    footer = _dumps({"record": "footer", "count": len(lines), "digest": digest})
    return "\n".join([header, *lines, footer]) + "\n"


def run_scenario(cfg: ScenarioConfig) -> ScenarioReport:
    """Simulate ``cfg`` in recovered and baseline mode and compare them.

    Raises:
        NoAliveNodes: recovery had work to place but every node had failed.
    """
    arrivals = cfg.resolved_arrivals()
    total_work = sum(cfg.loads) + sum(size for _, size in arrivals)
    recovered = _Run(cfg, "recovered", arrivals)
    recovered.run()
    baseline = _Run(cfg, "baseline", arrivals)
    baseline.run()

    rec_response = recovered.response()
    if rec_response is None:  # cannot happen unless every node is lost
        raise NoAliveNodes(f"{cfg.scenario_id}: recovered run left work unprocessed")
    base_response = baseline.response()
    latencies = [t - recovered.crashed[n] for n, t in recovered.detected.items()]
    return ScenarioReport(
        scenario_id=cfg.scenario_id,
        config_hash=cfg.config_hash(),
        response_time_recovered=rec_response,
        response_time_baseline=base_response,
        improvement_ratio=improvement_ratio(base_response, rec_response),
        redistribution=recovered.redistribution_report(),
        assignments=tuple(recovered.assignments),
        detection_latency=max(latencies, default=0),
        recovery_episodes=recovered.episodes,
        units_processed=recovered.units_processed,
        total_work=total_work,
        event_log=_format_log(cfg, [recovered, baseline]),
    )


def parse_log(text: str) -> tuple[dict, list[dict]]:
    """Split a log into its header and event records, checking integrity.

    Raises:
        CorruptLog: bad JSON, missing header or footer, count or digest
            mismatch, or a header whose config does not match its hash.
    """
    lines = text.splitlines()
    try:
        rows = [json.loads(line) for line in lines]
    except json.JSONDecodeError as exc:
        raise CorruptLog(f"unparseable log line: {exc}") from exc
    if not rows or rows[0].get("record") != "header":
        raise CorruptLog("missing header")
    if len(rows) < 2 or rows[-1].get("record") != "footer":
        raise CorruptLog("missing footer (truncated log?)")
    header, footer = rows[0], rows[-1]
    if header.get("schema_version") != LOG_SCHEMA_VERSION:
        raise CorruptLog(f"unsupported log schema {header.get('schema_version')!r}")
    body = lines[1:-1]
    if footer.get("count") != len(body):
        raise CorruptLog(f"footer expects {footer.get('count')} records, found {len(body)}")
    if hashlib.sha256("\n".join(body).encode()).hexdigest() != footer.get("digest"):
        raise CorruptLog("record digest mismatch")
    try:
        cfg = config_mod.from_dict(header["config"])
    except (KeyError, RecoveryError) as exc:
        raise CorruptLog(f"header config invalid: {exc}") from exc
    if cfg.config_hash() != header.get("config_hash"):
        raise CorruptLog("header config does not match its hash")
    return header, rows[1:-1]


def replay(log: str, config: ScenarioConfig | None = None) -> ScenarioReport:
    """Re-run the scenario recorded in ``log`` and check it reproduces exactly.

    If ``config`` is given it must hash to the config recorded in the log.

    Raises:
        CorruptLog: the log fails integrity checks or the re-run diverges.
        ConfigMismatch: ``config`` differs from the logged config.
    """
    header, _ = parse_log(log)
    cfg = config_mod.from_dict(header["config"])
    if config is not None and config.config_hash() != header["config_hash"]:
        raise ConfigMismatch("config hash does not match the log header")
    report = run_scenario(cfg)
    if report.event_log != log:
        raise CorruptLog("replay diverged from the recorded event log")
    return report
