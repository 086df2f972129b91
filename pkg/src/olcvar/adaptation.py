"""Adapting a life cycle with exceptional transitions from break fragments.

For each selected break fragment the context transitions around its block
locate an anchor state in the life cycle (the state the objects are in
when the exception strikes). The fragment's transitions are then inserted
as a chain of initiator-tagged transitions leading from the anchor to a
fresh exceptional final state; break semantics abort the enclosing flow,
so inserted chains never re-enter the base life cycle.

The base life cycle is never modified: an :class:`AdaptedOlc` layers the
insertions over it, and :meth:`AdaptedOlc.strip` recovers the base exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .errors import (
    AmbiguousPositionError,
    DuplicateTransitionError,
    NoContextError,
    NotAdjacentError,
    ParseError,
    StructureError,
    UnknownBcfError,
)
from .olc import (
    INITIATORS,
    CompositeOlc,
    Effect,
    Machine,
    MachineTransition,
    ObjectLifeCycle,
    OlcTransition,
    State,
    compose,
    dumps,
    loads,
    olc_from_dict,
    olc_to_dict,
    sync_from_dict,
    sync_to_dict,
)
from .sequence_diagram import SequenceDiagram, extract_bcfs, context_of


@dataclass(frozen=True)
class Position:
    """An anchor state, with its per-object coordinates for host lookup."""

    state_id: str
    coordinates: tuple[tuple[str, str], ...]  # (object id, state id), sorted

    def coordinate(self, object_id: str) -> str | None:
        for obj, state in self.coordinates:
            if obj == object_id:
                return state
        return None

    @staticmethod
    def at(olc, state_id: str) -> "Position":
        return Position(
            state_id, tuple(sorted(olc.coordinates_of(state_id).items()))
        )


@dataclass(frozen=True)
class InsertedTransition:
    """One exceptional transition: flat edge plus its per-object effect.

    ``flat_source`` is the anchor (a tuple id for composites) for the first
    transition of an object's chain and the previous fresh state afterwards;
    ``effect_source`` is the owning object's coordinate at that point.
    """

    id: str
    name: str
    object_id: str
    flat_source: str
    target: str
    effect_source: str
    initiator: str

    def effect(self) -> Effect:
        return Effect(self.object_id, self.effect_source, self.target)


@dataclass(frozen=True)
class BcfInsertion:
    bcf_id: str
    initiator: str
    anchor: str
    transitions: tuple[InsertedTransition, ...]


@dataclass(frozen=True)
class AdaptedOlc:
    base: ObjectLifeCycle | CompositeOlc
    extra_states: tuple[State, ...] = ()
    insertions: tuple[BcfInsertion, ...] = ()

    def inserted_transitions(self) -> tuple[InsertedTransition, ...]:
        return tuple(t for ins in self.insertions for t in ins.transitions)

    def inserted_ids(self) -> frozenset[str]:
        return frozenset(t.id for t in self.inserted_transitions())

    def fresh_state_ids(self) -> frozenset[str]:
        return frozenset(s.id for s in self.extra_states)

    def source_bcf_ids(self) -> tuple[str, ...]:
        return tuple(ins.bcf_id for ins in self.insertions)

    def flat_object_id(self) -> str:
        return self.base.flat_object_id()

    def _fresh_finals(self) -> frozenset[str]:
        inserted = self.inserted_transitions()
        continued = {t.effect_source for t in inserted}
        return frozenset(
            t.target
            for t in inserted
            if t.target in self.fresh_state_ids() and t.target not in continued
        )

    def machine(self) -> Machine:
        base = self.base.machine()
        return Machine(
            states=base.states + self.extra_states,
            initial=base.initial,
            finals=base.finals | self._fresh_finals(),
            transitions=base.transitions
            + tuple(
                MachineTransition(
                    id=t.id,
                    name=t.name,
                    source=t.flat_source,
                    target=t.target,
                    effects=(t.effect(),),
                    initiator=t.initiator,
                )
                for t in self.inserted_transitions()
            ),
        )

    def object_machines(self) -> dict[str, ObjectLifeCycle]:
        machines = dict(self.base.object_machines())
        fresh_finals = self._fresh_finals()
        extra_by_id = {s.id: s for s in self.extra_states}
        for object_id in list(machines):
            additions = [
                t for t in self.inserted_transitions() if t.object_id == object_id
            ]
            if not additions:
                continue
            machine = machines[object_id]
            known = set(s.id for s in machine.states)
            new_states = []
            for t in additions:
                if t.target not in known:
                    new_states.append(extra_by_id.get(t.target, State(t.target, t.target)))
                    known.add(t.target)
            machines[object_id] = ObjectLifeCycle(
                object_id=object_id,
                states=machine.states + tuple(new_states),
                initial=machine.initial,
                finals=machine.finals
                | frozenset(t.target for t in additions if t.target in fresh_finals),
                transitions=machine.transitions
                + tuple(
                    OlcTransition(
                        id=t.id,
                        name=t.name,
                        object_id=object_id,
                        source=t.effect_source,
                        target=t.target,
                        initiator=t.initiator,
                    )
                    for t in additions
                ),
            )
        return machines

    def coordinates_of(self, state_id: str) -> dict[str, str]:
        try:
            return self.base.coordinates_of(state_id)
        except StructureError:
            for t in self.inserted_transitions():
                if t.target == state_id:
                    return {t.object_id: state_id}
            raise

    def strip(self) -> ObjectLifeCycle | CompositeOlc:
        """The base life cycle: drop every tagged transition and the states
        only they reach. Adaptation is insert-only, so this is exact."""
        return replace(self.base)


def _as_adapted(olc) -> AdaptedOlc:
    if isinstance(olc, AdaptedOlc):
        return olc
    if isinstance(olc, (ObjectLifeCycle, CompositeOlc)):
        return AdaptedOlc(base=olc)
    raise StructureError(f"not a life cycle: {type(olc).__name__}")


def _normalize_effects(value) -> tuple[Effect, ...] | None:
    if value is None:
        return None
    if isinstance(value, Effect):
        return (value,)
    group = tuple(value)
    return group or None


def get_position(olc, before=None, after=None) -> Position:
    """Locate the state between the context effects in the life cycle.

    With both sides present the anchor is the unique state with an incoming
    transition inducing all of ``before`` and an outgoing one inducing all
    of ``after``; one-sided contexts anchor at the target (resp. source) of
    the matching transition. No match raises :class:`NotAdjacentError`;
    several raise :class:`AmbiguousPositionError` listing the candidates.
    """
    before = _normalize_effects(before)
    after = _normalize_effects(after)
    if before is None and after is None:
        raise ValueError("at least one context side is required")
    machine = olc.machine()

    def matching(group: tuple[Effect, ...]) -> list[MachineTransition]:
        wanted = {e.key() for e in group}
        return [
            t
            for t in machine.transitions
            if wanted <= {e.key() for e in t.effects}
        ]

    if before is not None and after is not None:
        targets = {t.target for t in matching(before)}
        sources = {t.source for t in matching(after)}
        candidates = sorted(targets & sources)
    elif before is not None:
        candidates = sorted({t.target for t in matching(before)})
    else:
        candidates = sorted({t.source for t in matching(after)})

    describe = lambda group: (
        "-" if group is None else "&".join(str(e) for e in group)
    )
    if not candidates:
        raise NotAdjacentError(
            f"no state lies between {describe(before)} and {describe(after)}"
        )
    if len(candidates) > 1:
        raise AmbiguousPositionError(
            f"states {candidates} all lie between {describe(before)} "
            f"and {describe(after)}"
        )
    return Position.at(olc, candidates[0])


def insert_bcf(
    olc,
    position: Position,
    bcf_transitions: Sequence[OlcTransition],
    initiator: str,
    *,
    bcf_id: str | None = None,
) -> AdaptedOlc:
    """Insert a break fragment's transitions as a tagged chain at the anchor.

    Each object's transitions are chained consecutively from its anchor
    coordinate through fresh intermediate states to a fresh exceptional
    final state (default ``<object>_cancelled``, reused when it already
    exists; a declared target naming an existing state is honored).
    Re-inserting an identical chain raises :class:`DuplicateTransitionError`.
    """
    aolc = _as_adapted(olc)
    if not bcf_transitions:
        raise StructureError("a break fragment must contribute at least one transition")
    if initiator not in INITIATORS:
        raise StructureError(f"unknown initiator: {initiator!r}")
    machine = aolc.machine()
    state_ids = set(machine.state_ids())
    if position.state_id not in state_ids:
        raise StructureError(f"anchor state {position.state_id!r} is not in the life cycle")
    machines = aolc.object_machines()
    transition_ids = {t.id for t in machine.transitions}
    existing_signatures = {
        (t.object_id, t.name, t.flat_source, t.target, t.initiator)
        for t in aolc.inserted_transitions()
    }

    by_object: dict[str, list[OlcTransition]] = {}
    for t in bcf_transitions:
        if t.object_id not in machines:
            raise StructureError(
                f"transition {t.id}: object {t.object_id!r} is not part of the life cycle"
            )
        by_object.setdefault(t.object_id, []).append(t)

    taken = set(state_ids)
    counters: dict[str, int] = {}

    def fresh_intermediate(object_id: str) -> str:
        k = counters.get(object_id, 0) + 1
        while f"{object_id}_x{k}" in taken:
            k += 1
        counters[object_id] = k
        candidate = f"{object_id}_x{k}"
        taken.add(candidate)
        return candidate

    new_states: list[State] = []
    inserted: list[InsertedTransition] = []
    for object_id, chain in by_object.items():
        coordinate = position.coordinate(object_id)
        if coordinate is None:
            raise StructureError(
                f"object {object_id} has no coordinate at anchor {position.state_id}"
            )
        effect_source = coordinate
        flat_source = position.state_id
        for index, t in enumerate(chain):
            last = index == len(chain) - 1
            if last:
                if t.target in taken:
                    target = t.target
                else:
                    target = f"{object_id}_cancelled"
                    if target not in taken:
                        new_states.append(State(target, "cancelled"))
                        taken.add(target)
            else:
                target = fresh_intermediate(object_id)
                new_states.append(State(target, target))
            if t.id in transition_ids:
                raise DuplicateTransitionError(
                    f"transition id {t.id!r} already exists in the life cycle"
                )
            signature = (object_id, t.name, flat_source, target, initiator)
            if signature in existing_signatures:
                raise DuplicateTransitionError(
                    f"an identical tagged transition ({t.name}: {flat_source}->{target}, "
                    f"{initiator}) was already inserted"
                )
            transition_ids.add(t.id)
            inserted.append(
                InsertedTransition(
                    id=t.id,
                    name=t.name,
                    object_id=object_id,
                    flat_source=flat_source,
                    target=target,
                    effect_source=effect_source,
                    initiator=initiator,
                )
            )
            effect_source = target
            flat_source = target

    insertion = BcfInsertion(
        bcf_id=bcf_id or f"bcf:{bcf_transitions[0].id}",
        initiator=initiator,
        anchor=position.state_id,
        transitions=tuple(inserted),
    )
    return AdaptedOlc(
        base=aolc.base,
        extra_states=aolc.extra_states + tuple(new_states),
        insertions=aolc.insertions + (insertion,),
    )


def adapt_olc(olc, sd: SequenceDiagram, select: str | None = None) -> AdaptedOlc:
    """Insert the selected break fragments (all when ``select`` is None).

    Fragments are processed once each, in diagram order. Context and anchor
    errors are re-raised with the offending fragment id.
    """
    fragments = extract_bcfs(sd)
    if select is not None:
        fragments = tuple(f for f in fragments if f.id == select)
        if not fragments:
            raise UnknownBcfError(f"no break fragment with id {select!r} in {sd.id}")

    aolc = _as_adapted(olc)
    for bcf in fragments:
        before, after = context_of(sd, bcf)
        specs: list[OlcTransition] = []
        for mid in bcf.message_ids:
            message = sd.message(mid)
            for j, effect in enumerate(message.effects):
                specs.append(
                    OlcTransition(
                        id=message.id if len(message.effects) == 1 else f"{message.id}#{j + 1}",
                        name=message.name,
                        object_id=effect.object_id,
                        source=effect.source,
                        target=effect.target,
                    )
                )
        if not specs:
            raise StructureError(
                f"fragment {bcf.id} contains no effect-bearing message"
            )
        try:
            position = get_position(aolc, before, after)
        except (NotAdjacentError, AmbiguousPositionError) as exc:
            raise type(exc)(f"fragment {bcf.id}: {exc}") from exc
        aolc = insert_bcf(aolc, position, specs, bcf.initiator, bcf_id=bcf.id)
    return aolc


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def aolc_to_dict(aolc: AdaptedOlc) -> dict:
    """Flat OLC view plus a provenance block sufficient to reconstruct."""
    data = olc_to_dict(aolc)
    base = aolc.base
    if isinstance(base, CompositeOlc):
        base_kind = "composite"
        components = [olc_to_dict(c) for c in base.components]
        sync = sync_to_dict(base.sync)
    else:
        base_kind = "single"
        components = [olc_to_dict(base)]
        sync = {"groups": []}
    data["provenance"] = {
        "baseKind": base_kind,
        "components": components,
        "sync": sync,
        "extraStates": [
            {"id": s.id, "label": s.label} for s in aolc.extra_states
        ],
        "insertions": [
            {
                "bcf": ins.bcf_id,
                "initiator": ins.initiator,
                "anchor": ins.anchor,
                "transitions": [
                    {
                        "id": t.id,
                        "name": t.name,
                        "object": t.object_id,
                        "from": t.effect_source,
                        "to": t.target,
                        "flatFrom": t.flat_source,
                    }
                    for t in ins.transitions
                ],
            }
            for ins in aolc.insertions
        ],
    }
    return data


def aolc_from_dict(data: Mapping) -> AdaptedOlc:
    provenance = data.get("provenance")
    if provenance is None:
        if "olcs" in data:
            olcs = [olc_from_dict(raw) for raw in data["olcs"]]
            return AdaptedOlc(base=compose(olcs, sync_from_dict(data.get("sync", {}))))
        return AdaptedOlc(base=olc_from_dict(data))
    if not isinstance(provenance, Mapping):
        raise ParseError("adapted life cycle: provenance must be an object")
    components = [olc_from_dict(raw) for raw in provenance.get("components", [])]
    if not components:
        raise ParseError("adapted life cycle: provenance lists no components")
    if provenance.get("baseKind") == "composite":
        base: ObjectLifeCycle | CompositeOlc = compose(
            components, sync_from_dict(provenance.get("sync", {}))
        )
    else:
        base = components[0]
    extra_states = tuple(
        State(str(raw["id"]), str(raw.get("label", raw["id"])))
        for raw in provenance.get("extraStates", [])
    )
    insertions = []
    for raw in provenance.get("insertions", []):
        transitions = tuple(
            InsertedTransition(
                id=str(t["id"]),
                name=str(t.get("name", t["id"])),
                object_id=str(t["object"]),
                flat_source=str(t["flatFrom"]),
                target=str(t["to"]),
                effect_source=str(t["from"]),
                initiator=str(raw["initiator"]),
            )
            for t in raw.get("transitions", [])
        )
        insertions.append(
            BcfInsertion(
                bcf_id=str(raw.get("bcf", "")),
                initiator=str(raw["initiator"]),
                anchor=str(raw.get("anchor", "")),
                transitions=transitions,
            )
        )
    return AdaptedOlc(
        base=base, extra_states=extra_states, insertions=tuple(insertions)
    )


def parse_aolc(text: str) -> AdaptedOlc:
    return aolc_from_dict(loads(text, "adapted life cycle"))


def serialize_aolc(aolc: AdaptedOlc) -> str:
    return dumps(aolc_to_dict(aolc))
