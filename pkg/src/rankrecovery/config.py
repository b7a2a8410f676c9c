"""Scenario files: parsing, validation and canonical form.

Scenario files are YAML (JSON is accepted too, being a YAML subset)::

    schema_version: 1
    scenario_id: four-node-1
    nodes:
      loads: [4, 9, 32, 40]
      jobs: {P4: [20, 20]}          # optional, must sum to the node's load
    failures: [{tick: 5, node: P3}]
    arrivals: [{tick: 2, size: 5}]
    generated_arrivals: {count: 10, min_size: 1, max_size: 8, horizon: 50}
    heartbeat: {period: 10, miss_threshold: 3}
    response: {rate: 1, fixed_overhead: 0}
    recovery: {epsilon: 1, max_passes: null, queue_policy: failure_first}
    baseline: {policy: stall, successor: null}
    seed: 0

Nodes are numbered P1..Pn in the order of ``nodes.loads``; references may be
written as ``P3`` or ``3``. Every section except ``schema_version`` and
``nodes`` is optional. Unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any

import yaml

from .errors import ParseError, ValidationError
from .reassignment import QueuePolicy

SCHEMA_VERSION = 1

_NODE_REF = re.compile(r"^[Pp]?(\d+)$")


class BaselinePolicy(str, Enum):
    STALL = "stall"
    SUCCESSOR = "successor"


@dataclass(frozen=True)
class ArrivalGenerator:
    count: int
    min_size: int
    max_size: int
    horizon: int


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_id: str
    loads: tuple[int, ...]
    jobs: tuple[tuple[int, tuple[int, ...]], ...] = ()
    failures: tuple[tuple[int, int], ...] = ()  # (tick, node)
    arrivals: tuple[tuple[int, int], ...] = ()  # (tick, size)
    generated_arrivals: ArrivalGenerator | None = None
    period: int = 10
    miss_threshold: int = 3
    rate: int = 1
    fixed_overhead: int = 0
    epsilon: int = 1
    max_passes: int | None = None
    queue_policy: QueuePolicy = QueuePolicy.FAILURE_FIRST
    baseline_policy: BaselinePolicy = BaselinePolicy.STALL
    baseline_successor: int | None = None
    seed: int = 0

    @property
    def node_ids(self) -> list[int]:
        return list(range(1, len(self.loads) + 1))

    def job_map(self) -> dict[int, tuple[int, ...]]:
        return dict(self.jobs)

    def resolved_arrivals(self) -> list[tuple[int, int]]:
        """Explicit plus seeded generated arrivals, ordered by tick (stable)."""
        out = list(self.arrivals)
        gen = self.generated_arrivals
        if gen is not None:
            rng = random.Random(self.seed)
            for _ in range(gen.count):
                tick = rng.randint(0, gen.horizon)
                out.append((tick, rng.randint(gen.min_size, gen.max_size)))
        return sorted(out, key=lambda a: a[0])

    def to_dict(self) -> dict[str, Any]:
        """Canonical file form; ``from_dict(to_dict())`` is the identity."""
        return {
            "schema_version": SCHEMA_VERSION,
            "scenario_id": self.scenario_id,
            "nodes": {
                "loads": list(self.loads),
                "jobs": {f"P{n}": list(s) for n, s in self.jobs},
            },
            "failures": [{"tick": t, "node": f"P{n}"} for t, n in self.failures],
            "arrivals": [{"tick": t, "size": s} for t, s in self.arrivals],
            "generated_arrivals": (
                asdict(self.generated_arrivals) if self.generated_arrivals else None
            ),
            "heartbeat": {"period": self.period, "miss_threshold": self.miss_threshold},
            "response": {"rate": self.rate, "fixed_overhead": self.fixed_overhead},
            "recovery": {
                "epsilon": self.epsilon,
                "max_passes": self.max_passes,
                "queue_policy": self.queue_policy.value,
            },
            "baseline": {
                "policy": self.baseline_policy.value,
                "successor": (
                    None if self.baseline_successor is None else f"P{self.baseline_successor}"
                ),
            },
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_overrides(self, **overrides: Any) -> ScenarioConfig:
        """Replace fields (``None`` values are ignored) and re-validate."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        if not changes:
            return self
        data = replace(self, **changes).to_dict()
        return from_dict(data)


class _Checker:
    """Collects validation errors instead of stopping at the first one."""

    def __init__(self) -> None:
        self.errors: list[str] = []

    def fail(self, path: str, msg: str) -> None:
        self.errors.append(f"{path}: {msg}")

    def mapping(self, value: Any, path: str, allowed: set[str]) -> dict:
        if value is None:
            return {}
        if not isinstance(value, dict):
            self.fail(path, "must be a mapping")
            return {}
        for key in sorted(set(value) - allowed, key=str):
            self.fail(f"{path}.{key}" if path else str(key), "unknown field")
        return value

    def integer(self, value: Any, path: str, minimum: int | None = None) -> int | None:
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, f"must be an integer, got {value!r}")
            return None
        if minimum is not None and value < minimum:
            self.fail(path, f"must be >= {minimum}, got {value}")
            return None
        return value

    def node(self, value: Any, path: str, count: int) -> int | None:
        if isinstance(value, bool):
            m = None
        elif isinstance(value, int):
            m = _NODE_REF.match(str(value))
        elif isinstance(value, str):
            m = _NODE_REF.match(value.strip())
        else:
            m = None
        if m is None:
            self.fail(path, f"not a node reference: {value!r}")
            return None
        nid = int(m.group(1))
        if not 1 <= nid <= count:
            self.fail(path, f"unknown node P{nid} (cluster has P1..P{count})")
            return None
        return nid

    def choice(self, value: Any, path: str, enum: type[Enum]):
        try:
            return enum(value)
        except ValueError:
            options = ", ".join(e.value for e in enum)
            self.fail(path, f"must be one of {options}, got {value!r}")
            return None


_TOP = {
    "schema_version", "scenario_id", "nodes", "failures", "arrivals",
    "generated_arrivals", "heartbeat", "response", "recovery", "baseline", "seed",
}


def from_dict(data: Any, default_id: str = "scenario") -> ScenarioConfig:
    """Validate a parsed scenario document.

    Raises:
        ValidationError: with one message per problem found.
    """
    c = _Checker()
    doc = c.mapping(data, "", _TOP)
    if not isinstance(data, dict):
        raise ValidationError(c.errors)

    version = doc.get("schema_version")
    if version is None:
        c.fail("schema_version", "required")
    elif version != SCHEMA_VERSION:
        c.fail("schema_version", f"unsupported version {version!r} (expected {SCHEMA_VERSION})")

    scenario_id = doc.get("scenario_id", default_id)
    if not isinstance(scenario_id, str) or not scenario_id:
        c.fail("scenario_id", "must be a non-empty string")
        scenario_id = default_id

    nodes = c.mapping(doc.get("nodes"), "nodes", {"count", "loads", "jobs"})
    loads: list[int] = []
    raw_loads = nodes.get("loads")
    if "nodes" not in doc:
        c.fail("nodes", "required")
    elif not isinstance(raw_loads, list) or not raw_loads:
        c.fail("nodes.loads", "must be a non-empty list of integers")
    else:
        for k, v in enumerate(raw_loads):
            val = c.integer(v, f"nodes.loads[{k}]", 0)
            loads.append(0 if val is None else val)
    count = len(loads)
    if "count" in nodes:
        declared = c.integer(nodes["count"], "nodes.count", 1)
        if declared is not None and loads and declared != count:
            c.fail("nodes.count", f"is {declared} but nodes.loads has {count} entries")

    jobs: dict[int, tuple[int, ...]] = {}
    raw = nodes.get("jobs")
    raw_jobs = c.mapping(raw, "nodes.jobs", set(raw) if isinstance(raw, dict) else set())
    for key, sizes in raw_jobs.items():
        path = f"nodes.jobs.{key}"
        nid = c.node(key, path, count)
        if not isinstance(sizes, list):
            c.fail(path, "must be a list of job sizes")
            continue
        checked = [c.integer(s, f"{path}[{k}]", 1) for k, s in enumerate(sizes)]
        if nid is None or None in checked:
            continue
        if nid in jobs:
            c.fail(path, f"duplicate job list for P{nid}")
        elif sum(checked) != loads[nid - 1]:
            c.fail(path, f"job sizes sum to {sum(checked)} but P{nid} has load {loads[nid - 1]}")
        else:
            jobs[nid] = tuple(checked)

    failures: list[tuple[int, int]] = []
    raw_failures = doc.get("failures") or []
    if not isinstance(raw_failures, list):
        c.fail("failures", "must be a list")
        raw_failures = []
    seen_failed: set[int] = set()
    for k, item in enumerate(raw_failures):
        path = f"failures[{k}]"
        item = c.mapping(item, path, {"tick", "node"})
        if "tick" not in item or "node" not in item:
            c.fail(path, "needs both tick and node")
            continue
        tick = c.integer(item["tick"], f"{path}.tick", 0)
        nid = c.node(item["node"], f"{path}.node", count)
        if nid is not None and nid in seen_failed:
            c.fail(f"{path}.node", f"P{nid} is already scheduled to fail")
        elif tick is not None and nid is not None:
            seen_failed.add(nid)
            failures.append((tick, nid))

    arrivals: list[tuple[int, int]] = []
    raw_arrivals = doc.get("arrivals") or []
    if not isinstance(raw_arrivals, list):
        c.fail("arrivals", "must be a list")
        raw_arrivals = []
    for k, item in enumerate(raw_arrivals):
        path = f"arrivals[{k}]"
        item = c.mapping(item, path, {"tick", "size"})
        if "tick" not in item or "size" not in item:
            c.fail(path, "needs both tick and size")
            continue
        tick = c.integer(item["tick"], f"{path}.tick", 0)
        size = c.integer(item["size"], f"{path}.size", 1)
        if tick is not None and size is not None:
            arrivals.append((tick, size))

    generator = None
    if doc.get("generated_arrivals") is not None:
        g = c.mapping(
            doc["generated_arrivals"], "generated_arrivals",
            {"count", "min_size", "max_size", "horizon"},
        )
        vals = {
            "count": c.integer(g.get("count"), "generated_arrivals.count", 0),
            "min_size": c.integer(g.get("min_size", 1), "generated_arrivals.min_size", 1),
            "max_size": c.integer(g.get("max_size"), "generated_arrivals.max_size", 1),
            "horizon": c.integer(g.get("horizon"), "generated_arrivals.horizon", 0),
        }
        if None not in vals.values():
            if vals["max_size"] < vals["min_size"]:
                c.fail("generated_arrivals.max_size", "must be >= min_size")
            else:
                generator = ArrivalGenerator(**vals)

    hb = c.mapping(doc.get("heartbeat"), "heartbeat", {"period", "miss_threshold"})
    period = c.integer(hb.get("period", 10), "heartbeat.period", 1)
    threshold = c.integer(hb.get("miss_threshold", 3), "heartbeat.miss_threshold", 1)

    resp = c.mapping(doc.get("response"), "response", {"rate", "fixed_overhead"})
    rate = c.integer(resp.get("rate", 1), "response.rate", 1)
    overhead = c.integer(resp.get("fixed_overhead", 0), "response.fixed_overhead", 0)

    rec = c.mapping(doc.get("recovery"), "recovery", {"epsilon", "max_passes", "queue_policy"})
    epsilon = c.integer(rec.get("epsilon", 1), "recovery.epsilon", 1)
    max_passes = rec.get("max_passes")
    if max_passes is not None:
        max_passes = c.integer(max_passes, "recovery.max_passes", 1)
    policy = c.choice(rec.get("queue_policy", "failure_first"), "recovery.queue_policy", QueuePolicy)

    base = c.mapping(doc.get("baseline"), "baseline", {"policy", "successor"})
    baseline_policy = c.choice(base.get("policy", "stall"), "baseline.policy", BaselinePolicy)
    successor = None
    if base.get("successor") is not None:
        successor = c.node(base["successor"], "baseline.successor", count)
    if baseline_policy is BaselinePolicy.SUCCESSOR and base.get("successor") is None:
        c.fail("baseline.successor", "required when baseline.policy is successor")

    seed = c.integer(doc.get("seed", 0), "seed")

    if c.errors:
        raise ValidationError(c.errors)
    return ScenarioConfig(
        scenario_id=scenario_id,
        loads=tuple(loads),
        jobs=tuple(sorted(jobs.items())),
        failures=tuple(sorted(failures)),
        arrivals=tuple(arrivals),
        generated_arrivals=generator,
        period=period,
        miss_threshold=threshold,
        rate=rate,
        fixed_overhead=overhead,
        epsilon=epsilon,
        max_passes=max_passes,
        queue_policy=policy,
        baseline_policy=baseline_policy,
        baseline_successor=successor,
        seed=seed,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    """Read and validate a scenario file.

    Raises:
        ParseError: unreadable file or malformed YAML/JSON.
        ValidationError: the document parsed but broke the schema.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be a mapping")
    return from_dict(data, default_id=path.stem)
