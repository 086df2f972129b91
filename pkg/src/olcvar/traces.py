"""Bounded enumeration of process-model executions.

Executions follow token-game semantics: the start event puts one token on
its outgoing flow; tasks, gateways, and end events consume and produce
tokens; a run is complete when no token remains. A trace is the sequence
of *completed* task ids of a run.

Exclusive splits branch into every guard; parallel blocks yield all
interleavings. An interrupting boundary event is an alternative to its
host task completing: the token on the host's incoming flow moves to the
handler path and the host does not appear in the trace (its work was cut
short, so its effects never happen).

Loops are unrolled by bounding how often each sequence flow may carry a
token: at most ``loop_bound + 1`` times per run. Runs that dead-lock
(e.g. a starved parallel join) are discarded.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .errors import ExplosionError
from .process_model import Node, NodeKind, ProcessModel

#: Default cap on the number of enumerated runs; override with the
#: OLCVAR_TRACE_CAP environment variable or the ``cap`` argument.
DEFAULT_TRACE_CAP = 100_000

_ENV_CAP = "OLCVAR_TRACE_CAP"


def resolve_trace_cap(cap: int | None = None) -> int:
    if cap is not None:
        return cap
    raw = os.environ.get(_ENV_CAP)
    if raw is None:
        return DEFAULT_TRACE_CAP
    try:
        return int(raw)
    except ValueError as exc:
        raise ExplosionError(f"{_ENV_CAP} must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class _Move:
    consumed: tuple[tuple[str, str], ...]
    produced: tuple[tuple[str, str], ...]
    completed_task: str | None


def _moves_of(pm: ProcessModel) -> dict[str, list[_Move]]:
    """Precompute, per node, the moves available when its tokens are present."""
    moves: dict[str, list[_Move]] = {}
    for node in pm.nodes:
        node_moves: list[_Move] = []
        incoming = [(e.source, e.target) for e in pm.incoming(node.id)]
        outgoing = [(e.source, e.target) for e in pm.outgoing(node.id)]
        if node.kind is NodeKind.START or node.kind is NodeKind.BOUNDARY:
            moves[node.id] = []
            continue
        if node.kind is NodeKind.END:
            for edge in incoming:
                node_moves.append(_Move((edge,), (), None))
        elif node.kind is NodeKind.TASK:
            handlers = [
                (e.source, e.target)
                for b in pm.boundary_events_of(node.id)
                for e in pm.outgoing(b.id)
            ]
            for edge in incoming:
                node_moves.append(_Move((edge,), tuple(outgoing), node.id))
                for handler_edge in handlers:
                    node_moves.append(_Move((edge,), (handler_edge,), None))
        elif node.kind is NodeKind.XOR:
            if node.direction == "split":
                for edge in incoming:
                    for out in outgoing:
                        node_moves.append(_Move((edge,), (out,), None))
            else:
                for edge in incoming:
                    node_moves.append(_Move((edge,), tuple(outgoing), None))
        elif node.kind is NodeKind.PARALLEL:
            if node.direction == "split":
                for edge in incoming:
                    node_moves.append(_Move((edge,), tuple(outgoing), None))
            else:
                node_moves.append(_Move(tuple(incoming), tuple(outgoing), None))
        moves[node.id] = node_moves
    return moves


def enumerate_traces(
    pm: ProcessModel, loop_bound: int, *, cap: int | None = None
) -> tuple[tuple[str, ...], ...]:
    """All start-to-end task-id traces with each flow used <= loop_bound + 1 times.

    Returns the deduplicated traces in sorted order. Raises
    :class:`ExplosionError` when more than ``cap`` runs complete.
    """
    if loop_bound < 0:
        raise ValueError("loop_bound must be >= 0")
    cap = resolve_trace_cap(cap)
    budget = loop_bound + 1

    start_edge = pm.outgoing(pm.start().id)[0]
    initial_marking = ((start_edge.source, start_edge.target), 1)
    moves = _moves_of(pm)
    node_order = [n.id for n in pm.nodes]  # sorted by construction

    traces: set[tuple[str, ...]] = set()
    completed_runs = 0
    visited: set[tuple] = set()
    step_cap = max(cap * 50, 1_000_000)
    steps = 0

    # marking and used are dicts edge -> count, carried as sorted tuples in
    # the visited set for hash-order independence.
    stack: list[tuple[dict, dict, tuple[str, ...]]] = [
        ({initial_marking[0]: 1}, {initial_marking[0]: 1}, ())
    ]
    while stack:
        marking, used, trace = stack.pop()
        steps += 1
        if steps > step_cap:
            raise ExplosionError(
                f"trace enumeration explored more than {step_cap} steps"
            )
        state_key = (
            tuple(sorted(marking.items())),
            tuple(sorted(used.items())),
            trace,
        )
        if state_key in visited:
            continue
        visited.add(state_key)

        if not marking:
            traces.add(trace)
            completed_runs += 1
            if completed_runs > cap:
                raise ExplosionError(
                    f"more than {cap} runs enumerated; raise {_ENV_CAP} or the cap "
                    "argument if this is intended"
                )
            continue

        for node_id in node_order:
            for move in moves[node_id]:
                if any(marking.get(edge, 0) < 1 for edge in move.consumed):
                    continue
                if any(used.get(edge, 0) >= budget for edge in move.produced):
                    continue
                next_marking = dict(marking)
                for edge in move.consumed:
                    next_marking[edge] -= 1
                    if next_marking[edge] == 0:
                        del next_marking[edge]
                next_used = used
                if move.produced:
                    next_used = dict(used)
                for edge in move.produced:
                    next_marking[edge] = next_marking.get(edge, 0) + 1
                    next_used[edge] = next_used.get(edge, 0) + 1
                next_trace = trace
                if move.completed_task is not None:
                    next_trace = trace + (move.completed_task,)
                stack.append((next_marking, next_used, next_trace))

    return tuple(sorted(traces))
