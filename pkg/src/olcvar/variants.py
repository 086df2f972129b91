"""Generating process-model variants from an adapted life cycle.

Each inserted break fragment becomes one exception pattern in the base
model: an interrupting boundary event on the host task (the task whose
effect leaves the anchor state), a handler chain with one task per tagged
transition (carrying that transition as its effect), and a fresh end
event. The boundary trigger follows the fragment's initiator: External
exceptions arrive as messages, Internal ones as errors, Timeouts as timers.

Verification checks the variant against the adapted life cycle: full
conformance, coverage of the inserted transitions (strict mode covers the
whole adapted life cycle), and base-trace preservation (every base run is
still possible without any boundary event firing).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .adaptation import AdaptedOlc, Position
from .compliance import (
    CheckReport,
    ComplianceReport,
    Violation,
    check_conformance,
    check_coverage,
)
from .errors import AmbiguousHostError, HostNotFoundError, StructureError
from .olc import Effect, OlcTransition
from .process_model import (
    Node,
    NodeKind,
    ProcessModel,
    Provenance,
    SequenceFlow,
    Trigger,
    TRIGGER_BY_INITIATOR,
)
from .traces import enumerate_traces


@dataclass(frozen=True)
class ExceptionPattern:
    """Boundary event + handler chain + end event, parameterized by trigger."""

    kind: str
    trigger: Trigger


PATTERNS = {
    "External": ExceptionPattern("external", Trigger.MESSAGE),
    "Internal": ExceptionPattern("internal", Trigger.ERROR),
    "Timeout": ExceptionPattern("timeout", Trigger.TIMER),
}


def pattern_for(initiator: str) -> ExceptionPattern:
    if initiator not in PATTERNS:
        raise StructureError(f"unknown initiator: {initiator!r}")
    return PATTERNS[initiator]


def find_host(pm: ProcessModel, anchor: Position) -> Node:
    """The task in flight at the anchor: its effect leaves an anchor coordinate.

    No candidate raises :class:`HostNotFoundError`; several raise
    :class:`AmbiguousHostError` listing them.
    """
    candidates = []
    for task in pm.tasks():
        for effect in task.effects:
            coordinate = anchor.coordinate(effect.object_id)
            if coordinate is not None and effect.source == coordinate:
                candidates.append(task)
                break
    if not candidates:
        raise HostNotFoundError(
            f"no task's effect leaves anchor state {anchor.state_id}"
        )
    if len(candidates) > 1:
        raise AmbiguousHostError(
            f"tasks {sorted(t.id for t in candidates)} all leave anchor state "
            f"{anchor.state_id}"
        )
    return candidates[0]


def insert_pattern(
    pm: ProcessModel,
    anchor: Position,
    tagged: Sequence[OlcTransition],
    pattern: ExceptionPattern,
) -> ProcessModel:
    """Attach one exception pattern for the tagged transitions at the anchor.

    All base nodes and edges are kept untouched; only the boundary event,
    the handler tasks, the fresh end event, and their flows are added.
    """
    if not tagged:
        raise StructureError("an exception pattern needs at least one tagged transition")
    host = find_host(pm, anchor)

    taken = set(pm.node_ids())

    def fresh(base: str) -> str:
        candidate, k = base, 1
        while candidate in taken:
            k += 1
            candidate = f"{base}_{k}"
        taken.add(candidate)
        return candidate

    boundary_id = fresh(f"b_{tagged[0].id}")
    handler_ids = [fresh(f"t_{t.id}") for t in tagged]
    end_id = fresh(f"end_{tagged[0].id}")

    new_nodes = [
        Node(
            id=boundary_id,
            kind=NodeKind.BOUNDARY,
            label=tagged[0].name,
            trigger=pattern.trigger,
            interrupting=True,
            host=host.id,
        )
    ]
    for node_id, t in zip(handler_ids, tagged):
        new_nodes.append(
            Node(
                id=node_id,
                kind=NodeKind.TASK,
                label=t.name,
                effects=(
                    Effect(t.object_id, t.source, t.target, self_loop=t.source == t.target),
                ),
            )
        )
    new_nodes.append(Node(id=end_id, kind=NodeKind.END))

    chain = [boundary_id] + handler_ids + [end_id]
    new_edges = [SequenceFlow(a, b) for a, b in zip(chain, chain[1:])]

    return ProcessModel(
        id=pm.id,
        nodes=pm.nodes + tuple(new_nodes),
        edges=pm.edges + tuple(new_edges),
        provenance=pm.provenance,
    )


def generate_variant(bm: ProcessModel, aolc: AdaptedOlc) -> ProcessModel:
    """Apply one pattern per inserted break fragment, in insertion order.

    The result carries provenance: base model id, adapted life cycle id,
    applied fragment ids, pattern kinds, and the ids of every added node.
    With no insertions the variant is the base model plus provenance.
    """
    pm = replace(bm, provenance=None)
    bcf_ids: list[str] = []
    kinds: list[str] = []
    for insertion in aolc.insertions:
        pattern = pattern_for(insertion.initiator)
        anchor = Position.at(aolc, insertion.anchor)
        tagged = [
            OlcTransition(
                id=t.id,
                name=t.name,
                object_id=t.object_id,
                source=t.effect_source,
                target=t.target,
                initiator=insertion.initiator,
            )
            for t in insertion.transitions
        ]
        pm = insert_pattern(pm, anchor, tagged, pattern)
        bcf_ids.append(insertion.bcf_id)
        kinds.append(pattern.kind)

    added = sorted(pm.node_ids() - bm.node_ids())
    return ProcessModel(
        id=f"{bm.id}__variant",
        nodes=pm.nodes,
        edges=pm.edges,
        provenance=Provenance(
            base_model_id=bm.id,
            aolc_id=aolc.flat_object_id(),
            bcf_ids=tuple(bcf_ids),
            pattern_kinds=tuple(kinds),
            added_nodes=tuple(added),
        ),
    )


def strip_variant(vpm: ProcessModel) -> ProcessModel:
    """Delete the pattern subgraph recorded in provenance; recovers the base."""
    if vpm.provenance is None:
        return vpm
    removed = set(vpm.provenance.added_nodes)
    return ProcessModel(
        id=vpm.provenance.base_model_id or vpm.id,
        nodes=tuple(n for n in vpm.nodes if n.id not in removed),
        edges=tuple(
            e for e in vpm.edges if e.source not in removed and e.target not in removed
        ),
        provenance=None,
    )


def _preservation_report(
    vpm: ProcessModel, *, loop_bound: int, trace_cap: int | None
) -> CheckReport:
    base = strip_variant(vpm)
    added = set(vpm.provenance.added_nodes) if vpm.provenance else set()
    base_traces = set(enumerate_traces(base, loop_bound, cap=trace_cap))
    variant_traces = enumerate_traces(vpm, loop_bound, cap=trace_cap)
    quiet = {t for t in variant_traces if not (set(t) & added)}

    violations = []
    for trace in sorted(base_traces - quiet):
        violations.append(
            Violation(
                "missing-base-trace",
                f"[{', '.join(trace)}]",
                "a base run is no longer possible without a boundary event firing",
            )
        )
    for trace in sorted(quiet - base_traces):
        violations.append(
            Violation(
                "new-quiet-trace",
                f"[{', '.join(trace)}]",
                "the variant admits a new run in which no boundary event fires",
            )
        )
    return CheckReport(tuple(violations))


def verify_variant(
    vpm: ProcessModel,
    aolc: AdaptedOlc,
    *,
    strict: bool = False,
    loop_bound: int = 1,
    trace_cap: int | None = None,
) -> ComplianceReport:
    """Consistency of a variant with the adapted life cycle it came from.

    Conformance runs in full; coverage is restricted to the inserted
    transitions and their fresh states (the new behavior must be reachable)
    unless ``strict`` re-checks the whole adapted life cycle. Base-trace
    preservation is asserted against the variant's own provenance.
    """
    conformance = check_conformance(
        vpm, aolc, loop_bound=loop_bound, trace_cap=trace_cap
    )
    coverage = check_coverage(vpm, aolc, loop_bound=loop_bound, trace_cap=trace_cap)
    if not strict:
        inserted_subjects = {
            f"{t.object_id}:{t.id}" for t in aolc.inserted_transitions()
        } | {
            f"{t.object_id}:{t.target}"
            for t in aolc.inserted_transitions()
            if t.target in aolc.fresh_state_ids()
        }
        coverage = CheckReport(
            tuple(v for v in coverage.violations if v.subject in inserted_subjects)
        )
    preservation = _preservation_report(vpm, loop_bound=loop_bound, trace_cap=trace_cap)
    return ComplianceReport(
        conformance=conformance, coverage=coverage, preservation=preservation
    )
