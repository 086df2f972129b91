"""Object life cycles and their synchronized composition.

An :class:`ObjectLifeCycle` is a labeled state machine for one business
object. Several life cycles can be composed into a :class:`CompositeOlc`
whose states are tuples (one coordinate per object) and whose transitions
fire either alone or jointly according to a :class:`SyncSpec`.

Both classes expose a uniform flat view (:meth:`machine`) used by path
enumeration, validation, adaptation, and compliance checking, plus a
per-object decomposition (:meth:`object_machines`) used wherever effects
must be matched object by object.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import InvalidSyncError, ParseError, StructureError

INITIATORS = ("External", "Internal", "Timeout")

#: Separator for tuple state ids in the flat view of a composite.
STATE_JOIN = "+"
#: Separator for joint transition ids/names in the flat view of a composite.
TRANSITION_JOIN = "|"


@dataclass(frozen=True)
class Effect:
    """One object state transition induced by a task or message."""

    object_id: str
    source: str
    target: str
    self_loop: bool = False

    def key(self) -> tuple[str, str, str]:
        return (self.object_id, self.source, self.target)

    def __str__(self) -> str:
        return f"{self.object_id}:{self.source}->{self.target}"


@dataclass(frozen=True)
class State:
    id: str
    label: str


@dataclass(frozen=True)
class OlcTransition:
    """A transition of a single object life cycle.

    ``initiator`` is only ever set on exceptional transitions created by
    adaptation; base life cycles carry ``None``.
    """

    id: str
    name: str
    object_id: str
    source: str
    target: str
    initiator: str | None = None

    def effect(self) -> Effect:
        return Effect(
            self.object_id, self.source, self.target, self_loop=self.source == self.target
        )


@dataclass(frozen=True)
class MachineTransition:
    """Transition of the flat machine view: may induce several per-object effects."""

    id: str
    name: str
    source: str
    target: str
    effects: tuple[Effect, ...]
    initiator: str | None = None


@dataclass(frozen=True)
class Machine:
    """Flat state-machine view shared by single, composite, and adapted life cycles."""

    states: tuple[State, ...]
    initial: str
    finals: frozenset[str]
    transitions: tuple[MachineTransition, ...]

    def state_ids(self) -> frozenset[str]:
        return frozenset(s.id for s in self.states)

    def outgoing(self, state_id: str) -> tuple[MachineTransition, ...]:
        return tuple(t for t in self.transitions if t.source == state_id)


@dataclass(frozen=True)
class ObjectLifeCycle:
    object_id: str
    states: tuple[State, ...]
    initial: str
    finals: frozenset[str]
    transitions: tuple[OlcTransition, ...]

    def state_ids(self) -> frozenset[str]:
        return frozenset(s.id for s in self.states)

    def machine(self) -> Machine:
        return Machine(
            states=self.states,
            initial=self.initial,
            finals=self.finals,
            transitions=tuple(
                MachineTransition(
                    id=t.id,
                    name=t.name,
                    source=t.source,
                    target=t.target,
                    effects=(t.effect(),),
                    initiator=t.initiator,
                )
                for t in self.transitions
            ),
        )

    def object_machines(self) -> dict[str, "ObjectLifeCycle"]:
        return {self.object_id: self}

    def flat_object_id(self) -> str:
        return self.object_id

    def coordinates_of(self, state_id: str) -> dict[str, str]:
        if state_id not in self.state_ids():
            raise StructureError(f"unknown state: {state_id}")
        return {self.object_id: state_id}


@dataclass(frozen=True)
class SyncSpec:
    """Groups of transition ids that must fire jointly during composition."""

    groups: tuple[frozenset[str], ...] = ()

    @staticmethod
    def empty() -> "SyncSpec":
        return SyncSpec(())


@dataclass(frozen=True)
class CompositeTransition:
    """A joint (or singleton) firing of member transitions from a tuple state."""

    id: str
    name: str
    parts: tuple[OlcTransition, ...]
    source: tuple[str, ...]
    target: tuple[str, ...]
    initiator: str | None = None

    def effects(self) -> tuple[Effect, ...]:
        return tuple(p.effect() for p in self.parts)


@dataclass(frozen=True)
class CompositeOlc:
    """Reachable synchronized product of several object life cycles."""

    components: tuple[ObjectLifeCycle, ...]
    states: tuple[tuple[str, ...], ...]
    initial: tuple[str, ...]
    finals: frozenset[tuple[str, ...]]
    transitions: tuple[CompositeTransition, ...]
    sync: "SyncSpec" = field(default_factory=lambda: SyncSpec(()))
    warnings: tuple[str, ...] = ()

    def component_ids(self) -> tuple[str, ...]:
        return tuple(c.object_id for c in self.components)

    def flat_object_id(self) -> str:
        return STATE_JOIN.join(self.component_ids())

    def flat_state_id(self, state: tuple[str, ...]) -> str:
        return STATE_JOIN.join(state)

    def _label_of(self, state: tuple[str, ...]) -> str:
        labels = []
        for component, coord in zip(self.components, state):
            by_id = {s.id: s.label for s in component.states}
            labels.append(by_id.get(coord, coord))
        return STATE_JOIN.join(labels)

    def machine(self) -> Machine:
        return Machine(
            states=tuple(
                State(self.flat_state_id(s), self._label_of(s)) for s in self.states
            ),
            initial=self.flat_state_id(self.initial),
            finals=frozenset(self.flat_state_id(s) for s in self.finals),
            transitions=tuple(
                MachineTransition(
                    id=t.id,
                    name=t.name,
                    source=self.flat_state_id(t.source),
                    target=self.flat_state_id(t.target),
                    effects=t.effects(),
                    initiator=t.initiator,
                )
                for t in self.transitions
            ),
        )

    def object_machines(self) -> dict[str, ObjectLifeCycle]:
        return {c.object_id: c for c in self.components}

    def coordinates_of(self, state_id: str) -> dict[str, str]:
        for state in self.states:
            if self.flat_state_id(state) == state_id:
                return dict(zip(self.component_ids(), state))
        raise StructureError(f"unknown composite state: {state_id}")


@dataclass(frozen=True)
class ValidationIssue:
    kind: str
    subject: str
    detail: str
    severity: str = "error"  # "error" | "warning"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...] = ()

    @property
    def empty(self) -> bool:
        return not self.issues

    @property
    def ok(self) -> bool:
        """True when no error-severity issue is present (warnings allowed)."""
        return all(i.severity != "error" for i in self.issues)

    def errors(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "error")

    def warnings(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "warning")

    def to_dict(self) -> dict:
        return {
            "verdict": "PASS" if self.ok else "FAIL",
            "issues": [
                {
                    "kind": i.kind,
                    "subject": i.subject,
                    "detail": i.detail,
                    "severity": i.severity,
                }
                for i in self.issues
            ],
        }


def validate_olc(olc) -> ValidationReport:
    """Check structural invariants of a life cycle (single, composite, or adapted).

    Problems are reported, never raised: dangling state references, duplicate
    ids, a missing initial state, and initiator tags on base transitions are
    errors; unreachable states are warnings so partially specified life
    cycles stay usable.
    """
    machine = olc.machine()
    issues: list[ValidationIssue] = []

    seen_states: set[str] = set()
    for s in machine.states:
        if s.id in seen_states:
            issues.append(
                ValidationIssue("duplicate-id", s.id, "state id occurs more than once")
            )
        seen_states.add(s.id)

    state_ids = machine.state_ids()
    if machine.initial not in state_ids:
        issues.append(
            ValidationIssue(
                "dangling-reference", machine.initial, "initial state is not declared"
            )
        )
    for f in sorted(machine.finals):
        if f not in state_ids:
            issues.append(
                ValidationIssue("dangling-reference", f, "final state is not declared")
            )

    seen_transitions: set[str] = set()
    tagged_base = isinstance(olc, (ObjectLifeCycle, CompositeOlc))
    for t in machine.transitions:
        if t.id in seen_transitions:
            issues.append(
                ValidationIssue("duplicate-id", t.id, "transition id occurs more than once")
            )
        seen_transitions.add(t.id)
        for end, role in ((t.source, "source"), (t.target, "target")):
            if end not in state_ids:
                issues.append(
                    ValidationIssue(
                        "dangling-reference",
                        t.id,
                        f"transition {role} references unknown state {end!r}",
                    )
                )
        if t.initiator is not None:
            if t.initiator not in INITIATORS:
                issues.append(
                    ValidationIssue(
                        "invalid-initiator", t.id, f"unknown initiator {t.initiator!r}"
                    )
                )
            elif tagged_base:
                issues.append(
                    ValidationIssue(
                        "tagged-transition",
                        t.id,
                        "initiator tag on a base life cycle transition",
                        severity="warning",
                    )
                )

    if isinstance(olc, ObjectLifeCycle):
        for t in olc.transitions:
            if t.object_id != olc.object_id:
                issues.append(
                    ValidationIssue(
                        "wrong-object",
                        t.id,
                        f"transition owned by {t.object_id!r}, life cycle is {olc.object_id!r}",
                    )
                )

    if machine.initial in state_ids:
        reachable = {machine.initial}
        frontier = deque([machine.initial])
        targets: dict[str, list[str]] = {}
        for t in machine.transitions:
            targets.setdefault(t.source, []).append(t.target)
        while frontier:
            cur = frontier.popleft()
            for nxt in targets.get(cur, ()):
                if nxt in state_ids and nxt not in reachable:
                    reachable.add(nxt)
                    frontier.append(nxt)
        for s in machine.states:
            if s.id not in reachable:
                issues.append(
                    ValidationIssue(
                        "unreachable-state",
                        s.id,
                        "not reachable from the initial state",
                        severity="warning",
                    )
                )

    return ValidationReport(tuple(issues))


@dataclass(frozen=True)
class _Action:
    """One candidate firing during composition: a sync group or a lone transition."""

    parts: tuple[tuple[int, OlcTransition], ...]  # (component index, transition)

    def key(self) -> tuple[str, ...]:
        return tuple(t.id for _, t in self.parts)


def _composite_final(
    components: Sequence[ObjectLifeCycle], state: tuple[str, ...]
) -> bool:
    # Final when every object is done or was never started, and at least one
    # object actually finished (otherwise the initial tuple would count).
    any_final = False
    for component, coord in zip(components, state):
        if coord in component.finals:
            any_final = True
        elif coord != component.initial:
            return False
    return any_final


def compose(olcs: Sequence[ObjectLifeCycle], sync: SyncSpec | None = None) -> CompositeOlc:
    """Build the reachable synchronized product of several life cycles.

    A transition outside every sync group fires alone, updating only its
    object's coordinate. A sync group fires jointly, and only when every
    member is enabled in its coordinate. Only tuples reachable from the
    tuple of initials are retained.

    Raises :class:`InvalidSyncError` for groups referencing missing or
    ambiguous transition ids, groups mixing transitions of one object, or
    ids claimed by two groups. A group whose members are never co-enabled
    is reported as a warning on the result, not an error.
    """
    sync = sync or SyncSpec.empty()
    ids = [o.object_id for o in olcs]
    if len(set(ids)) != len(ids):
        raise StructureError(f"object ids are not pairwise distinct: {ids}")
    if not olcs:
        raise StructureError("compose needs at least one life cycle")

    by_id: dict[str, list[tuple[int, OlcTransition]]] = {}
    for index, olc in enumerate(olcs):
        for t in olc.transitions:
            by_id.setdefault(t.id, []).append((index, t))

    grouped: set[str] = set()
    actions: list[_Action] = []
    for group in sync.groups:
        parts: list[tuple[int, OlcTransition]] = []
        for tid in sorted(group):
            owners = by_id.get(tid)
            if not owners:
                raise InvalidSyncError(f"sync group references missing transition {tid!r}")
            if len(owners) > 1:
                raise InvalidSyncError(
                    f"transition id {tid!r} is ambiguous across objects "
                    f"{sorted(o.object_id for _, o in owners)}"
                )
            if tid in grouped:
                raise InvalidSyncError(f"transition {tid!r} appears in more than one group")
            grouped.add(tid)
            parts.append(owners[0])
        objects = [t.object_id for _, t in parts]
        if len(set(objects)) != len(objects):
            raise InvalidSyncError(
                f"sync group {sorted(group)} contains two transitions of one object"
            )
        parts.sort(key=lambda pair: pair[0])
        actions.append(_Action(tuple(parts)))

    for index, olc in enumerate(olcs):
        for t in olc.transitions:
            if t.id not in grouped:
                actions.append(_Action(((index, t),)))
    actions.sort(key=lambda a: a.key())

    initial = tuple(o.initial for o in olcs)
    discovered: list[tuple[str, ...]] = [initial]
    seen = {initial}
    fired: set[tuple[str, ...]] = set()
    raw: list[tuple[tuple[str, ...], _Action, tuple[str, ...]]] = []
    frontier = deque([initial])
    while frontier:
        current = frontier.popleft()
        for action in actions:
            if all(current[i] == t.source for i, t in action.parts):
                nxt = list(current)
                for i, t in action.parts:
                    nxt[i] = t.target
                successor = tuple(nxt)
                raw.append((current, action, successor))
                fired.add(action.key())
                if successor not in seen:
                    seen.add(successor)
                    discovered.append(successor)
                    frontier.append(successor)

    key_counts: dict[tuple[str, ...], int] = {}
    for _, action, _ in raw:
        key_counts[action.key()] = key_counts.get(action.key(), 0) + 1

    transitions = []
    for source, action, target in raw:
        base_id = TRANSITION_JOIN.join(t.id for _, t in action.parts)
        if key_counts[action.key()] > 1:
            tid = f"{base_id}@{STATE_JOIN.join(source)}"
        else:
            tid = base_id
        transitions.append(
            CompositeTransition(
                id=tid,
                name=TRANSITION_JOIN.join(t.name for _, t in action.parts),
                parts=tuple(t for _, t in action.parts),
                source=source,
                target=target,
            )
        )

    warnings = []
    fired_ids = {frozenset(k) for k in fired}
    for group in sync.groups:
        if frozenset(group) not in fired_ids:
            warnings.append(
                "sync group "
                + "+".join(sorted(group))
                + " is never co-enabled from any reachable state"
            )

    finals = frozenset(s for s in discovered if _composite_final(olcs, s))
    return CompositeOlc(
        components=tuple(olcs),
        states=tuple(discovered),
        initial=initial,
        finals=finals,
        transitions=tuple(transitions),
        sync=sync,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True, order=True)
class LifecyclePath:
    """A transition-id sequence from the initial state; complete when it ends final."""

    transitions: tuple[str, ...]
    complete: bool


def olc_paths(olc, max_len: int) -> tuple[LifecyclePath, ...]:
    """Enumerate all transition sequences from the initial state of length <= max_len.

    Includes the empty sequence. Sequences ending in a final state are
    flagged complete. Works on any life cycle exposing :meth:`machine`.
    """
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    machine = olc.machine()
    outgoing: dict[str, list[MachineTransition]] = {}
    for t in machine.transitions:
        outgoing.setdefault(t.source, []).append(t)
    for successors in outgoing.values():
        successors.sort(key=lambda t: t.id)

    paths: set[LifecyclePath] = set()
    stack: list[tuple[str, tuple[str, ...]]] = [(machine.initial, ())]
    while stack:
        state, prefix = stack.pop()
        paths.add(LifecyclePath(prefix, state in machine.finals))
        if len(prefix) == max_len:
            continue
        for t in outgoing.get(state, ()):
            stack.append((t.target, prefix + (t.id,)))
    return tuple(sorted(paths))


# ---------------------------------------------------------------------------
# JSON (de)serialization
# ---------------------------------------------------------------------------


def _require(mapping: Mapping, key: str, context: str):
    if key not in mapping:
        raise ParseError(f"{context}: missing key {key!r}")
    return mapping[key]


def effect_from_dict(data: Mapping, context: str = "effect") -> Effect:
    if not isinstance(data, Mapping):
        raise ParseError(f"{context}: expected an object")
    effect = Effect(
        object_id=str(_require(data, "object", context)),
        source=str(_require(data, "from", context)),
        target=str(_require(data, "to", context)),
        self_loop=bool(data.get("selfLoop", False)),
    )
    if effect.source == effect.target and not effect.self_loop:
        raise ParseError(
            f"{context}: {effect} keeps the state unchanged but is not flagged selfLoop"
        )
    return effect


def effect_to_dict(effect: Effect) -> dict:
    data = {"object": effect.object_id, "from": effect.source, "to": effect.target}
    if effect.self_loop:
        data["selfLoop"] = True
    return data


def olc_from_dict(data: Mapping) -> ObjectLifeCycle:
    context = "life cycle"
    object_id = str(_require(data, "object", context))
    states = []
    for raw in _require(data, "states", context):
        if not isinstance(raw, Mapping):
            raise ParseError(f"{context}: states entries must be objects")
        sid = str(_require(raw, "id", "state"))
        states.append(State(sid, str(raw.get("label", sid))))
    transitions = []
    for raw in _require(data, "transitions", context):
        if not isinstance(raw, Mapping):
            raise ParseError(f"{context}: transitions entries must be objects")
        initiator = raw.get("initiator")
        if initiator is not None and initiator not in INITIATORS:
            raise ParseError(f"transition: unknown initiator {initiator!r}")
        transitions.append(
            OlcTransition(
                id=str(_require(raw, "id", "transition")),
                name=str(raw.get("name", raw["id"])),
                object_id=str(raw.get("object", object_id)),
                source=str(_require(raw, "from", "transition")),
                target=str(_require(raw, "to", "transition")),
                initiator=initiator,
            )
        )
    return ObjectLifeCycle(
        object_id=object_id,
        states=tuple(states),
        initial=str(_require(data, "initial", context)),
        finals=frozenset(str(f) for f in _require(data, "finals", context)),
        transitions=tuple(transitions),
    )


def olc_to_dict(olc) -> dict:
    """Serialize a life cycle (single or composite) to the shared OLC schema.

    Composites are flattened: tuple state ids joined by ``+`` and joint
    transition ids/names joined by ``|``.
    """
    machine = olc.machine()
    transitions = []
    for t in sorted(machine.transitions, key=lambda t: t.id):
        entry = {
            "id": t.id,
            "name": t.name,
            "from": t.source,
            "to": t.target,
        }
        objects = sorted({e.object_id for e in t.effects})
        if len(objects) == 1:
            entry["object"] = objects[0]
        if t.initiator is not None:
            entry["initiator"] = t.initiator
        transitions.append(entry)
    return {
        "object": olc.flat_object_id(),
        "states": [
            {"id": s.id, "label": s.label}
            for s in sorted(machine.states, key=lambda s: s.id)
        ],
        "initial": machine.initial,
        "finals": sorted(machine.finals),
        "transitions": transitions,
    }


def sync_from_dict(data: Mapping) -> SyncSpec:
    groups = []
    for raw in data.get("groups", []):
        if not isinstance(raw, (list, tuple)):
            raise ParseError("sync spec: groups entries must be arrays")
        groups.append(frozenset(str(t) for t in raw))
    return SyncSpec(tuple(groups))


def sync_to_dict(sync: SyncSpec) -> dict:
    return {"groups": [sorted(g) for g in sync.groups]}


def dumps(data: Mapping) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def loads(text: str, context: str = "document") -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{context}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{context}: top level must be an object")
    return data


def parse_olc(text: str) -> ObjectLifeCycle:
    return olc_from_dict(loads(text, "life cycle"))


def serialize_olc(olc) -> str:
    return dumps(olc_to_dict(olc))


def parse_lifecycle_bundle(text: str):
    """Load either a single life cycle or a bundle ``{"olcs": [...], "sync": {...}}``.

    Bundles are composed on the fly and yield a :class:`CompositeOlc`.
    """
    data = loads(text, "life cycle input")
    if "olcs" in data:
        olcs = [olc_from_dict(raw) for raw in data["olcs"]]
        sync = sync_from_dict(data.get("sync", {}))
        return compose(olcs, sync)
    return olc_from_dict(data)
