"""BPMN-subset process graphs with object-state effects on tasks.

The subset covers start/end events, tasks, exclusive and parallel gateways,
sequence flows with optional guard labels, and interrupting boundary events
(message/error/timer) attached to tasks. Tasks carry the object state
transitions they induce as a list of :class:`~olcvar.olc.Effect`.

Canonical JSON is the source of truth; a BPMN 2.0 XML subset is available
as an interchange format (see :mod:`olcvar.bpmn_xml`).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import ParseError, StructureError, UnsupportedElementError
from .olc import Effect, dumps, effect_from_dict, effect_to_dict, loads


class NodeKind(str, Enum):
    START = "startEvent"
    END = "endEvent"
    TASK = "task"
    XOR = "exclusiveGateway"
    PARALLEL = "parallelGateway"
    BOUNDARY = "boundaryEvent"


class Trigger(str, Enum):
    MESSAGE = "message"
    ERROR = "error"
    TIMER = "timer"


#: Exception class of a break fragment -> boundary event trigger.
TRIGGER_BY_INITIATOR = {
    "External": Trigger.MESSAGE,
    "Internal": Trigger.ERROR,
    "Timeout": Trigger.TIMER,
}
INITIATOR_BY_TRIGGER = {v: k for k, v in TRIGGER_BY_INITIATOR.items()}


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    label: str = ""
    effects: tuple[Effect, ...] = ()
    direction: str | None = None  # gateways: "split" | "join"
    trigger: Trigger | None = None  # boundary events
    interrupting: bool | None = None  # boundary events; must be True
    host: str | None = None  # boundary events: hosting task id


@dataclass(frozen=True)
class SequenceFlow:
    source: str
    target: str
    guard: str | None = None


@dataclass(frozen=True)
class Provenance:
    """Where a generated variant came from; absent on hand-written models."""

    base_model_id: str
    aolc_id: str = ""
    bcf_ids: tuple[str, ...] = ()
    pattern_kinds: tuple[str, ...] = ()
    added_nodes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "baseModel": self.base_model_id,
            "aolc": self.aolc_id,
            "bcfs": list(self.bcf_ids),
            "patterns": list(self.pattern_kinds),
            "addedNodes": list(self.added_nodes),
        }

    @staticmethod
    def from_dict(data: Mapping) -> "Provenance":
        return Provenance(
            base_model_id=str(data.get("baseModel", "")),
            aolc_id=str(data.get("aolc", "")),
            bcf_ids=tuple(str(b) for b in data.get("bcfs", [])),
            pattern_kinds=tuple(str(p) for p in data.get("patterns", [])),
            added_nodes=tuple(str(n) for n in data.get("addedNodes", [])),
        )


@dataclass(frozen=True)
class ProcessModel:
    """Immutable, validated process graph.

    Construction normalizes node and edge order (sorted by id) and enforces
    every structural invariant, so any :class:`ProcessModel` instance is
    well-formed by construction.
    """

    id: str
    nodes: tuple[Node, ...]
    edges: tuple[SequenceFlow, ...]
    provenance: Provenance | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.id))
        )
        object.__setattr__(
            self,
            "edges",
            tuple(sorted(self.edges, key=lambda e: (e.source, e.target))),
        )
        _validate(self)

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise StructureError(f"unknown node: {node_id}")

    def node_ids(self) -> frozenset[str]:
        return frozenset(n.id for n in self.nodes)

    def tasks(self) -> tuple[Node, ...]:
        return tuple(n for n in self.nodes if n.kind is NodeKind.TASK)

    def outgoing(self, node_id: str) -> tuple[SequenceFlow, ...]:
        return tuple(e for e in self.edges if e.source == node_id)

    def incoming(self, node_id: str) -> tuple[SequenceFlow, ...]:
        return tuple(e for e in self.edges if e.target == node_id)

    def boundary_events_of(self, task_id: str) -> tuple[Node, ...]:
        return tuple(
            n for n in self.nodes if n.kind is NodeKind.BOUNDARY and n.host == task_id
        )

    def start(self) -> Node:
        return next(n for n in self.nodes if n.kind is NodeKind.START)


def structurally_equal(a: ProcessModel, b: ProcessModel) -> bool:
    """Graph equality respecting ids but ignoring model id and provenance."""
    return a.nodes == b.nodes and a.edges == b.edges


def _validate(pm: ProcessModel) -> None:
    ids = [n.id for n in pm.nodes]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise StructureError(f"duplicate node ids: {dupes}")
    id_set = set(ids)

    starts = [n for n in pm.nodes if n.kind is NodeKind.START]
    ends = [n for n in pm.nodes if n.kind is NodeKind.END]
    if len(starts) != 1:
        raise StructureError(f"model must have exactly one start event, found {len(starts)}")
    if not ends:
        raise StructureError("model must have at least one end event")

    seen_edges: set[tuple[str, str]] = set()
    for e in pm.edges:
        if e.source not in id_set or e.target not in id_set:
            raise StructureError(f"edge {e.source}->{e.target} references an unknown node")
        if e.source == e.target:
            raise StructureError(f"self edge on node {e.source}")
        if (e.source, e.target) in seen_edges:
            raise StructureError(f"duplicate edge {e.source}->{e.target}")
        seen_edges.add((e.source, e.target))

    for n in pm.nodes:
        out = pm.outgoing(n.id)
        inc = pm.incoming(n.id)
        if n.effects and n.kind is not NodeKind.TASK:
            raise StructureError(f"node {n.id}: only tasks may carry effects")
        for effect in n.effects:
            if effect.source == effect.target and not effect.self_loop:
                raise StructureError(
                    f"node {n.id}: effect {effect} keeps the state unchanged "
                    "but is not flagged selfLoop"
                )
        if n.kind is NodeKind.START:
            if inc:
                raise StructureError(f"start event {n.id} must have no incoming edge")
            if len(out) != 1:
                raise StructureError(f"start event {n.id} must have exactly one outgoing edge")
        elif n.kind is NodeKind.END:
            if out:
                raise StructureError(f"end event {n.id} must have no outgoing edge")
        elif n.kind is NodeKind.TASK:
            if len(out) != 1:
                raise StructureError(f"task {n.id} must have exactly one outgoing edge")
        elif n.kind in (NodeKind.XOR, NodeKind.PARALLEL):
            if n.direction not in ("split", "join"):
                raise StructureError(
                    f"gateway {n.id}: direction must be 'split' or 'join'"
                )
            if n.direction == "split":
                if len(out) < 2:
                    raise StructureError(
                        f"{n.kind.value} split {n.id} needs at least two outgoing edges"
                    )
                if n.kind is NodeKind.XOR:
                    unguarded = [e.target for e in out if not e.guard]
                    if unguarded:
                        raise StructureError(
                            f"exclusive split {n.id}: outgoing edges to {unguarded} "
                            "have no guard label"
                        )
            else:
                if len(out) != 1:
                    raise StructureError(
                        f"{n.kind.value} join {n.id} must have exactly one outgoing edge"
                    )
                if len(inc) < 2:
                    raise StructureError(
                        f"{n.kind.value} join {n.id} needs at least two incoming edges"
                    )
        elif n.kind is NodeKind.BOUNDARY:
            if n.trigger is None:
                raise StructureError(f"boundary event {n.id} has no trigger")
            if n.interrupting is not True:
                raise StructureError(
                    f"boundary event {n.id} must be interrupting "
                    "(non-interrupting events are outside the subset)"
                )
            if n.host is None or n.host not in id_set:
                raise StructureError(f"boundary event {n.id} is not attached to a known task")
            if pm.node(n.host).kind is not NodeKind.TASK:
                raise StructureError(f"boundary event {n.id} must attach to a task")
            if inc:
                raise StructureError(
                    f"boundary event {n.id} must have no ordinary incoming edge"
                )
            if len(out) != 1:
                raise StructureError(
                    f"boundary event {n.id} must have exactly one outgoing edge"
                )

    # Every node must lie on a path from the start to some end. Boundary
    # events count as reachable through their host task.
    succ: dict[str, set[str]] = {n.id: set() for n in pm.nodes}
    pred: dict[str, set[str]] = {n.id: set() for n in pm.nodes}
    for e in pm.edges:
        succ[e.source].add(e.target)
        pred[e.target].add(e.source)
    for n in pm.nodes:
        if n.kind is NodeKind.BOUNDARY and n.host:
            succ[n.host].add(n.id)
            pred[n.id].add(n.host)

    def closure(seeds: Iterable[str], neighbours: dict[str, set[str]]) -> set[str]:
        seen = set(seeds)
        stack = list(seen)
        while stack:
            for nxt in neighbours[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    from_start = closure([starts[0].id], succ)
    to_end = closure([n.id for n in ends], pred)
    stranded = sorted(id_set - (from_start & to_end))
    if stranded:
        raise StructureError(f"nodes not on any start-to-end path: {stranded}")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def induced_transitions(pm: ProcessModel) -> frozenset[Effect]:
    """The set of object state transitions induced by the model's tasks."""
    return frozenset(effect for task in pm.tasks() for effect in task.effects)


def export_dot(pm: ProcessModel) -> str:
    """Render the model as a Graphviz digraph.

    Boundary events are linked to their host task with a dashed edge.
    """
    shapes = {
        NodeKind.START: "circle",
        NodeKind.END: "doublecircle",
        NodeKind.TASK: "box",
        NodeKind.XOR: "diamond",
        NodeKind.PARALLEL: "diamond",
        NodeKind.BOUNDARY: "circle",
    }

    def quote(text: str) -> str:
        return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'

    lines = [f"digraph {quote(pm.id)} {{", "  rankdir=LR;"]
    for n in pm.nodes:
        attrs = [f"shape={shapes[n.kind]}", f"label={quote(n.label or n.id)}"]
        if n.kind is NodeKind.PARALLEL:
            attrs[1] = f"label={quote('+')}"
        if n.kind is NodeKind.XOR and not n.label:
            attrs[1] = f"label={quote('x')}"
        if n.kind is NodeKind.BOUNDARY:
            attrs.append("style=dashed")
        lines.append(f"  {quote(n.id)} [{', '.join(attrs)}];")
    for e in pm.edges:
        attr = f" [label={quote(e.guard)}]" if e.guard else ""
        lines.append(f"  {quote(e.source)} -> {quote(e.target)}{attr};")
    for n in pm.nodes:
        if n.kind is NodeKind.BOUNDARY and n.host:
            lines.append(f"  {quote(n.host)} -> {quote(n.id)} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Canonical JSON
# ---------------------------------------------------------------------------

_KINDS = {k.value: k for k in NodeKind}
_TRIGGERS = {t.value: t for t in Trigger}


def model_from_dict(data: Mapping) -> ProcessModel:
    context = "process model"
    nodes = []
    for raw in data.get("nodes", []):
        if not isinstance(raw, Mapping):
            raise ParseError(f"{context}: nodes entries must be objects")
        if "id" not in raw or "kind" not in raw:
            raise ParseError(f"{context}: node needs 'id' and 'kind'")
        kind_name = str(raw["kind"])
        if kind_name not in _KINDS:
            raise UnsupportedElementError(kind_name, f"node {raw['id']}")
        kind = _KINDS[kind_name]
        trigger = None
        if raw.get("trigger") is not None:
            trigger_name = str(raw["trigger"])
            if trigger_name not in _TRIGGERS:
                raise UnsupportedElementError(trigger_name, f"trigger of node {raw['id']}")
            trigger = _TRIGGERS[trigger_name]
        nodes.append(
            Node(
                id=str(raw["id"]),
                kind=kind,
                label=str(raw.get("label", "")),
                effects=tuple(
                    effect_from_dict(e, f"effect of task {raw['id']}")
                    for e in raw.get("effects", [])
                ),
                direction=raw.get("direction"),
                trigger=trigger,
                interrupting=raw.get("interrupting"),
                host=raw.get("host"),
            )
        )
    edges = []
    for raw in data.get("edges", []):
        if not isinstance(raw, Mapping) or "from" not in raw or "to" not in raw:
            raise ParseError(f"{context}: edge needs 'from' and 'to'")
        guard = raw.get("guard")
        edges.append(
            SequenceFlow(str(raw["from"]), str(raw["to"]), None if guard is None else str(guard))
        )
    provenance = None
    if isinstance(data.get("provenance"), Mapping):
        provenance = Provenance.from_dict(data["provenance"])
    if "id" not in data:
        raise ParseError(f"{context}: missing key 'id'")
    return ProcessModel(
        id=str(data["id"]), nodes=tuple(nodes), edges=tuple(edges), provenance=provenance
    )


def model_to_dict(pm: ProcessModel) -> dict:
    nodes = []
    for n in pm.nodes:
        entry: dict = {"id": n.id, "kind": n.kind.value}
        if n.label:
            entry["label"] = n.label
        if n.effects:
            entry["effects"] = [effect_to_dict(e) for e in n.effects]
        if n.direction is not None:
            entry["direction"] = n.direction
        if n.trigger is not None:
            entry["trigger"] = n.trigger.value
        if n.interrupting is not None:
            entry["interrupting"] = n.interrupting
        if n.host is not None:
            entry["host"] = n.host
        nodes.append(entry)
    edges = []
    for e in pm.edges:
        entry = {"from": e.source, "to": e.target}
        if e.guard is not None:
            entry["guard"] = e.guard
        edges.append(entry)
    data = {"id": pm.id, "nodes": nodes, "edges": edges}
    if pm.provenance is not None:
        data["provenance"] = pm.provenance.to_dict()
    return data


def parse_model(text: str) -> ProcessModel:
    """Parse a process model from canonical JSON or the BPMN-XML subset.

    The format is detected from the first non-whitespace character.
    """
    stripped = text.lstrip()
    if stripped.startswith("<"):
        from . import bpmn_xml

        return bpmn_xml.model_from_xml(text)
    return model_from_dict(loads(text, "process model"))


def serialize_model(pm: ProcessModel, format: str = "json") -> str:
    """Serialize canonically; output is byte-stable for equal models."""
    if format == "json":
        return dumps(model_to_dict(pm))
    if format == "bpmn-xml":
        from . import bpmn_xml

        return bpmn_xml.model_to_xml(pm)
    raise ValueError(f"unknown format: {format!r}")
