from __future__ import annotations

import random

from olcvar import (
    Effect,
    Node,
    NodeKind,
    ProcessModel,
    SequenceFlow,
    check_compliance,
    check_conformance,
    check_coverage,
)

from .generators import mirror_model, random_olc
from .oracles import oracle_conformance, oracle_coverage


def empty_model() -> ProcessModel:
    return ProcessModel(
        id="empty",
        nodes=(Node("start", NodeKind.START), Node("end", NodeKind.END)),
        edges=(SequenceFlow("start", "end"),),
    )


def with_extra_task(pm: ProcessModel, task: Node, after: str) -> ProcessModel:
    """Splice `task` into the single outgoing edge of node `after`."""
    out = pm.outgoing(after)[0]
    edges = tuple(e for e in pm.edges if e != out) + (
        SequenceFlow(after, task.id),
        SequenceFlow(task.id, out.target, guard=out.guard),
    )
    return ProcessModel(id=pm.id, nodes=pm.nodes + (task,), edges=edges)


class TestConformance:
    def test_base_fixture_conforms(self, base_model, order_composite):
        assert check_conformance(base_model, order_composite).passed

    def test_empty_model_conforms_vacuously(self, order_composite):
        assert check_conformance(empty_model(), order_composite).passed

    def test_undefined_effect_is_named(self, base_model, order_composite):
        bad = with_extra_task(
            base_model,
            Node("t_rogue", NodeKind.TASK, effects=(Effect("PO", "RG", "SH"),)),
            "t_register_po",
        )
        report = check_conformance(bad, order_composite)
        assert not report.passed
        undefined = [v for v in report.violations if v.kind == "undefined-transition"]
        assert len(undefined) == 1
        assert undefined[0].subject == "task t_rogue"
        assert "PO:RG->SH" in undefined[0].detail

    def test_unknown_object_is_a_violation_not_an_error(self, base_model, order_composite):
        bad = with_extra_task(
            base_model,
            Node("t_alien", NodeKind.TASK, effects=(Effect("ZZ", "a", "b"),)),
            "t_check_stock",
        )
        report = check_conformance(bad, order_composite)
        assert [v.kind for v in report.violations] == ["unknown-object"]

    def test_out_of_order_effect_caught_only_by_trace_mode(self, base_model, order_composite):
        # Receiving the payment before shipping: every effect is defined in
        # the life cycle, but the order is impossible.
        shuffled = with_extra_task(
            base_model,
            Node("t_early_pay", NodeKind.TASK, effects=(Effect("PA", "CR", "RC"),)),
            "t_register_po",
        )
        assert check_conformance(shuffled, order_composite, mode="structural").passed
        report = check_conformance(shuffled, order_composite)
        assert not report.passed
        assert {v.kind for v in report.violations} == {"invalid-order"}

    def test_structural_monotonicity(self, order_composite):
        # Adding a task whose effect is a defined transition can never turn
        # structural conformance from PASS to FAIL (trace-level ordering
        # legitimately can, which is why this invariant pins the mode).
        rng = random.Random(29)
        machines = order_composite.object_machines()
        pool = [t for m in machines.values() for t in m.transitions]
        pm = mirror_model(machines["PO"], model_id="po-only")
        assert check_conformance(pm, order_composite, mode="structural").passed
        for i in range(20):
            t = rng.choice(pool)
            tasks = pm.tasks()
            anchor = rng.choice(tasks).id if tasks else "start"
            pm = with_extra_task(
                pm,
                Node(f"t_added_{i}", NodeKind.TASK, effects=(t.effect(),)),
                anchor,
            )
            assert check_conformance(pm, order_composite, mode="structural").passed


class TestCoverage:
    def test_base_fixture_covers_the_composite(self, base_model, order_composite):
        assert check_coverage(base_model, order_composite).passed

    def test_empty_model_covers_nothing(self, order_composite):
        report = check_coverage(empty_model(), order_composite)
        uncovered = {v.subject for v in report.violations if v.kind == "uncovered-transition"}
        assert uncovered == {
            "PO:register",
            "PO:Accept",
            "PO:Reject",
            "PO:close_po",
            "PR:Assemble",
            "PR:Ship",
            "PA:Create",
            "PA:Receive",
            "PA:close_pa",
        }

    def test_deleting_the_reject_branch_uncovers_it(self, base_model, order_composite):
        keep = {n.id for n in base_model.nodes} - {"g_available", "t_reject_po"}
        nodes = tuple(n for n in base_model.nodes if n.id in keep)
        edges = tuple(
            e
            for e in base_model.edges
            if e.source in keep and e.target in keep
        ) + (SequenceFlow("t_check_stock", "t_accept_po"),)
        trimmed = ProcessModel(id="no-reject", nodes=nodes, edges=edges)
        report = check_coverage(trimmed, order_composite)
        assert {v.subject for v in report.violations if v.kind == "uncovered-transition"} == {
            "PO:Reject",
            "PO:close_po",
        }
        assert {v.subject for v in report.violations if v.kind == "unvisited-state"} == {
            "PO:RJ",
            "PO:PO_closed",
        }


class TestCompliance:
    def test_base_fixture_passes(self, base_model, order_composite):
        report = check_compliance(base_model, order_composite)
        assert report.passed
        assert report.all_violations() == ()

    def test_empty_model_fails_on_coverage(self, order_composite):
        report = check_compliance(empty_model(), order_composite)
        assert not report.passed
        assert report.conformance.passed
        assert not report.coverage.passed

    def test_conformant_but_partial_model(self, order_olcs):
        po = order_olcs["PO"]
        partial = ProcessModel(
            id="partial",
            nodes=(
                Node("start", NodeKind.START),
                Node("t_reg", NodeKind.TASK, effects=(Effect("PO", "I1", "RG"),)),
                Node("end", NodeKind.END),
            ),
            edges=(SequenceFlow("start", "t_reg"), SequenceFlow("t_reg", "end")),
        )
        report = check_compliance(partial, po)
        assert report.conformance.passed
        assert not report.coverage.passed
        assert not report.passed

    def test_verdict_is_the_conjunction(self, base_model, order_composite):
        report = check_compliance(base_model, order_composite)
        assert report.passed == (report.conformance.passed and report.coverage.passed)
        data = report.to_dict()
        assert data["verdict"] == "PASS"
        assert data["conformance"]["verdict"] == "PASS"
        assert data["coverage"]["verdict"] == "PASS"


def mutate_effects(rng: random.Random, pm: ProcessModel, olc) -> ProcessModel:
    """Randomly corrupt some task effects to produce FAIL cases."""
    state_ids = sorted(s.id for s in olc.states)
    nodes = []
    for n in pm.nodes:
        if n.kind is NodeKind.TASK and n.effects and rng.random() < 0.3:
            e = n.effects[0]
            kind = rng.randrange(3)
            if kind == 0:  # retarget
                e = Effect(e.object_id, e.source, rng.choice(state_ids + ["zz"]))
            elif kind == 1:  # resource
                e = Effect(e.object_id, rng.choice(state_ids), e.target)
            else:  # foreign object
                e = Effect("alien", e.source, e.target)
            if e.source == e.target:
                e = Effect(e.object_id, e.source, e.target, self_loop=True)
            n = Node(n.id, n.kind, n.label, (e,))
        nodes.append(n)
    return ProcessModel(id=pm.id, nodes=tuple(nodes), edges=pm.edges)


class TestOracleAgreement:
    def test_structural_checks_agree_with_brute_force(self):
        rng = random.Random(101)
        agreements = 0
        for _ in range(150):
            olc = random_olc(rng, max_states=5)
            pm = mirror_model(olc)
            if rng.random() < 0.6:
                pm = mutate_effects(rng, pm, olc)
            report_conf = check_conformance(pm, olc, loop_bound=0)
            report_cov = check_coverage(pm, olc, loop_bound=0)
            assert report_conf.passed == oracle_conformance(pm, olc, 0)
            uncovered, unvisited = oracle_coverage(pm, olc, 0)
            got_uncovered = {
                tuple(v.subject.split(":", 1))
                for v in report_cov.violations
                if v.kind == "uncovered-transition"
            }
            got_unvisited = {
                tuple(v.subject.split(":", 1))
                for v in report_cov.violations
                if v.kind == "unvisited-state"
            }
            assert got_uncovered == uncovered
            assert got_unvisited == unvisited
            agreements += 1
        assert agreements == 150
