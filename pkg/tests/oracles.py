"""Independent brute-force oracles.

These re-derive expected results from first principles, sharing no code
with the implementation paths they check: a recursive token-game trace
enumerator, a recursive life-cycle path enumerator, a cartesian-product
composition enumerator, and conformance/coverage decided by membership of
effect sequences in enumerated path sets.
"""

from __future__ import annotations

from itertools import product

from olcvar import NodeKind, ObjectLifeCycle, ProcessModel


def oracle_traces(pm: ProcessModel, loop_bound: int) -> set[tuple[str, ...]]:
    """All completed-task traces, by naive recursion over token markings."""
    budget = loop_bound + 1
    by_id = {n.id: n for n in pm.nodes}
    incoming: dict[str, list[tuple[str, str]]] = {n.id: [] for n in pm.nodes}
    outgoing: dict[str, list[tuple[str, str]]] = {n.id: [] for n in pm.nodes}
    for e in pm.edges:
        incoming[e.target].append((e.source, e.target))
        outgoing[e.source].append((e.source, e.target))
    handlers: dict[str, list[tuple[str, str]]] = {}
    for n in pm.nodes:
        if n.kind is NodeKind.BOUNDARY and n.host:
            handlers.setdefault(n.host, []).extend(outgoing[n.id])

    results: set[tuple[str, ...]] = set()

    def options(marking: frozenset):
        counts = dict(marking)
        for edge in sorted(counts):
            node = by_id[edge[1]]
            if node.kind is NodeKind.END:
                yield (edge,), (), None
            elif node.kind is NodeKind.TASK:
                yield (edge,), tuple(outgoing[node.id]), node.id
                for handler_edge in handlers.get(node.id, []):
                    yield (edge,), (handler_edge,), None
            elif node.kind is NodeKind.XOR:
                if node.direction == "split":
                    for out in outgoing[node.id]:
                        yield (edge,), (out,), None
                else:
                    yield (edge,), tuple(outgoing[node.id]), None
            elif node.kind is NodeKind.PARALLEL:
                if node.direction == "split":
                    yield (edge,), tuple(outgoing[node.id]), None
                else:
                    needed = incoming[node.id]
                    if all(counts.get(e, 0) >= 1 for e in needed):
                        if edge == min(needed):  # fire once per marking
                            yield tuple(needed), tuple(outgoing[node.id]), None

    def explore(marking: frozenset, used: frozenset, trace: tuple[str, ...]):
        if not marking:
            results.add(trace)
            return
        counts = dict(marking)
        spent = dict(used)
        for consumed, produced, completed in options(marking):
            if any(spent.get(e, 0) + 1 > budget for e in produced):
                continue
            next_counts = dict(counts)
            ok = True
            for e in consumed:
                if next_counts.get(e, 0) < 1:
                    ok = False
                    break
                next_counts[e] -= 1
                if next_counts[e] == 0:
                    del next_counts[e]
            if not ok:
                continue
            next_spent = dict(spent)
            for e in produced:
                next_counts[e] = next_counts.get(e, 0) + 1
                next_spent[e] = next_spent.get(e, 0) + 1
            explore(
                frozenset(next_counts.items()),
                frozenset(next_spent.items()),
                trace + (completed,) if completed else trace,
            )

    first = outgoing[pm.start().id][0]
    explore(frozenset({(first, 1)}), frozenset({(first, 1)}), ())
    return results


def oracle_olc_paths(olc, max_len: int) -> set[tuple[tuple[str, str, str], ...]]:
    """All effect-key paths (object, source, target) from the initial state."""
    machine = olc.machine()
    paths: set[tuple] = set()

    def walk(state: str, prefix: tuple):
        paths.add(prefix)
        if len(prefix) == max_len:
            return
        for t in machine.transitions:
            if t.source == state:
                walk(t.target, prefix + tuple(e.key() for e in t.effects))

    walk(machine.initial, ())
    return paths


def oracle_object_paths(
    machine: ObjectLifeCycle, max_len: int
) -> set[tuple[tuple[str, str], ...]]:
    """All (source, target) pair sequences walkable from the initial state."""
    outgoing: dict[str, list] = {}
    for t in machine.transitions:
        outgoing.setdefault(t.source, []).append(t)
    paths: set[tuple] = set()

    def walk(state: str, prefix: tuple):
        paths.add(prefix)
        if len(prefix) == max_len:
            return
        for t in outgoing.get(state, []):
            walk(t.target, prefix + ((t.source, t.target),))

    walk(machine.initial, ())
    return paths


def _trace_effects(pm: ProcessModel, trace: tuple[str, ...]):
    effects = []
    by_id = {t.id: t for t in pm.tasks()}
    for task_id in trace:
        effects.extend(by_id[task_id].effects)
    return effects


def oracle_conformance(pm: ProcessModel, olc, loop_bound: int) -> bool:
    """Membership-in-path-set conformance over brute-force traces."""
    machines = olc.object_machines()
    pairs = {
        obj: {(t.source, t.target) for t in machine.transitions}
        for obj, machine in machines.items()
    }
    for task in pm.tasks():
        for effect in task.effects:
            if effect.object_id not in machines:
                return False
            if (effect.source, effect.target) not in pairs[effect.object_id]:
                return False
    for trace in oracle_traces(pm, loop_bound):
        per_object: dict[str, list[tuple[str, str]]] = {}
        for effect in _trace_effects(pm, trace):
            per_object.setdefault(effect.object_id, []).append(
                (effect.source, effect.target)
            )
        for obj, sequence in per_object.items():
            if obj not in machines:
                return False
            valid = oracle_object_paths(machines[obj], len(sequence))
            if tuple(sequence) not in valid:
                return False
    return True


def oracle_coverage(pm: ProcessModel, olc, loop_bound: int):
    """(uncovered transition ids, unvisited state ids) per object, brute force."""
    machines = olc.object_machines()
    covered_pairs: dict[str, set[tuple[str, str]]] = {obj: set() for obj in machines}
    for trace in oracle_traces(pm, loop_bound):
        for effect in _trace_effects(pm, trace):
            if effect.object_id in machines:
                covered_pairs[effect.object_id].add((effect.source, effect.target))

    uncovered: set[tuple[str, str]] = set()
    unvisited: set[tuple[str, str]] = set()
    for obj, machine in machines.items():
        defined = {(t.source, t.target) for t in machine.transitions}
        realized = covered_pairs[obj] & defined
        for t in machine.transitions:
            if (t.source, t.target) not in realized:
                uncovered.add((obj, t.id))
        visited = {machine.initial} | {target for _, target in realized}
        for s in machine.states:
            if s.id not in visited:
                unvisited.add((obj, s.id))
    return uncovered, unvisited


def oracle_compose_states(olcs, sync_groups) -> set[tuple[str, ...]]:
    """Reachable product states by exhaustive filtering of the full product."""
    grouped = {tid for group in sync_groups for tid in group}
    all_states = set(product(*[[s.id for s in o.states] for o in olcs]))

    def successors(state):
        found = []
        for i, olc in enumerate(olcs):
            for t in olc.transitions:
                if t.id in grouped or t.source != state[i]:
                    continue
                nxt = list(state)
                nxt[i] = t.target
                found.append(tuple(nxt))
        for group in sync_groups:
            members = []
            for tid in group:
                for i, olc in enumerate(olcs):
                    for t in olc.transitions:
                        if t.id == tid:
                            members.append((i, t))
            if all(state[i] == t.source for i, t in members):
                nxt = list(state)
                for i, t in members:
                    nxt[i] = t.target
                found.append(tuple(nxt))
        return found

    initial = tuple(o.initial for o in olcs)
    reachable = {initial}
    changed = True
    while changed:
        changed = False
        for state in list(reachable):
            for nxt in successors(state):
                if nxt in all_states and nxt not in reachable:
                    reachable.add(nxt)
                    changed = True
    return reachable
