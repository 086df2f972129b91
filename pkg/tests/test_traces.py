from __future__ import annotations

import random

import pytest

from olcvar import (
    Effect,
    ExplosionError,
    Node,
    NodeKind,
    ProcessModel,
    SequenceFlow,
    Trigger,
    enumerate_traces,
    induced_transitions,
)

from .generators import mirror_model, random_olc, random_process_model
from .oracles import oracle_traces


def chain(model_id: str, *task_ids: str) -> ProcessModel:
    nodes = [Node("start", NodeKind.START), Node("end", NodeKind.END)]
    nodes += [Node(t, NodeKind.TASK) for t in task_ids]
    sequence = ["start", *task_ids, "end"]
    edges = [SequenceFlow(a, b) for a, b in zip(sequence, sequence[1:])]
    return ProcessModel(id=model_id, nodes=tuple(nodes), edges=tuple(edges))


def parallel_ab() -> ProcessModel:
    return ProcessModel(
        id="par",
        nodes=(
            Node("start", NodeKind.START),
            Node("split", NodeKind.PARALLEL, direction="split"),
            Node("A", NodeKind.TASK),
            Node("B", NodeKind.TASK),
            Node("join", NodeKind.PARALLEL, direction="join"),
            Node("end", NodeKind.END),
        ),
        edges=(
            SequenceFlow("start", "split"),
            SequenceFlow("split", "A"),
            SequenceFlow("split", "B"),
            SequenceFlow("A", "join"),
            SequenceFlow("B", "join"),
            SequenceFlow("join", "end"),
        ),
    )


def loop_model() -> ProcessModel:
    return ProcessModel(
        id="loop",
        nodes=(
            Node("start", NodeKind.START),
            Node("work", NodeKind.TASK),
            Node("g", NodeKind.XOR, direction="split"),
            Node("end", NodeKind.END),
        ),
        edges=(
            SequenceFlow("start", "work"),
            SequenceFlow("work", "g"),
            SequenceFlow("g", "work", guard="again"),
            SequenceFlow("g", "end", guard="done"),
        ),
    )


class TestEnumeration:
    def test_base_fixture_has_two_traces(self, base_model):
        traces = enumerate_traces(base_model, 0)
        assert traces == (
            ("t_receive_po", "t_register_po", "t_check_stock", "t_accept_po",
             "t_assemble", "t_ship", "t_receive_payment"),
            ("t_receive_po", "t_register_po", "t_check_stock", "t_reject_po"),
        )

    def test_trivial_model(self):
        pm = chain("t0")
        assert enumerate_traces(pm, 0) == ((),)

    def test_parallel_interleavings(self):
        assert enumerate_traces(parallel_ab(), 0) == (("A", "B"), ("B", "A"))

    def test_loop_unrolls_with_bound(self):
        assert enumerate_traces(loop_model(), 0) == (("work",),)
        assert enumerate_traces(loop_model(), 1) == (("work",), ("work", "work"))
        assert enumerate_traces(loop_model(), 2) == (
            ("work",),
            ("work", "work"),
            ("work", "work", "work"),
        )

    def test_boundary_is_an_alternative_to_the_host(self):
        pm = ProcessModel(
            id="bnd",
            nodes=(
                Node("start", NodeKind.START),
                Node("work", NodeKind.TASK),
                Node("after", NodeKind.TASK),
                Node("end", NodeKind.END),
                Node("b", NodeKind.BOUNDARY, trigger=Trigger.MESSAGE,
                     interrupting=True, host="work"),
                Node("handler", NodeKind.TASK),
                Node("end2", NodeKind.END),
            ),
            edges=(
                SequenceFlow("start", "work"),
                SequenceFlow("work", "after"),
                SequenceFlow("after", "end"),
                SequenceFlow("b", "handler"),
                SequenceFlow("handler", "end2"),
            ),
        )
        # When the exception preempts the host, the host never completes,
        # so its id (and its effects) are absent from the trace.
        assert enumerate_traces(pm, 0) == (("handler",), ("work", "after"))

    def test_negative_bound_rejected(self, base_model):
        with pytest.raises(ValueError):
            enumerate_traces(base_model, -1)

    def test_explosion_cap(self, base_model):
        with pytest.raises(ExplosionError):
            enumerate_traces(base_model, 0, cap=1)

    def test_env_cap_is_honored(self, base_model, monkeypatch):
        monkeypatch.setenv("OLCVAR_TRACE_CAP", "1")
        with pytest.raises(ExplosionError):
            enumerate_traces(base_model, 0)

    def test_determinism(self, base_model):
        assert enumerate_traces(base_model, 1) == enumerate_traces(base_model, 1)


class TestAgainstOracle:
    def test_random_models_agree_with_recursive_oracle(self):
        rng = random.Random(41)
        for i in range(60):
            pm = random_process_model(rng, model_id=f"o{i}")
            bound = rng.choice([0, 1])
            assert set(enumerate_traces(pm, bound)) == oracle_traces(pm, bound)

    def test_traces_respect_edges(self):
        rng = random.Random(5)
        for i in range(40):
            pm = random_process_model(rng, model_id=f"e{i}")
            reachable_from: dict[str, set[str]] = {n.id: set() for n in pm.nodes}
            for e in pm.edges:
                reachable_from[e.source].add(e.target)
            for n in pm.nodes:
                if n.kind is NodeKind.BOUNDARY and n.host:
                    reachable_from[n.host].add(n.id)
            # Along a trace, each completed task must be forward-reachable
            # from its predecessor through the graph.
            import collections

            def reaches(a: str, b: str) -> bool:
                seen, queue = {a}, collections.deque([a])
                while queue:
                    for nxt in reachable_from[queue.popleft()]:
                        if nxt == b:
                            return True
                        if nxt not in seen:
                            seen.add(nxt)
                            queue.append(nxt)
                return False

            for trace in enumerate_traces(pm, 0):
                for a, b in zip(trace, trace[1:]):
                    # With parallel interleavings, consecutive tasks may be
                    # unordered; one of the two directions must hold.
                    assert reaches(a, b) or reaches(b, a) or any(
                        reaches(x, a) and reaches(x, b) for x in pm.node_ids()
                    )

    def test_mirror_traces_equal_maximal_paths(self):
        rng = random.Random(13)
        for _ in range(40):
            olc = random_olc(rng)
            pm = mirror_model(olc)
            machine = olc.machine()
            outgoing: dict[str, list] = {}
            for t in machine.transitions:
                outgoing.setdefault(t.source, []).append(t)

            maximal: set[tuple[str, ...]] = set()

            def walk(state, prefix):
                if not outgoing.get(state):
                    maximal.add(prefix)
                    return
                for t in outgoing[state]:
                    walk(t.target, prefix + (f"task_{t.id}",))

            walk(machine.initial, ())
            assert set(enumerate_traces(pm, 0)) == maximal

    def test_induced_equals_union_of_trace_effects_for_mirrors(self):
        rng = random.Random(17)
        for _ in range(30):
            pm = mirror_model(random_olc(rng))
            by_id = {t.id: t.effects for t in pm.tasks()}
            union = {
                e for trace in enumerate_traces(pm, 0) for t in trace for e in by_id[t]
            }
            assert union == set(induced_transitions(pm))
