"""Conformance and coverage of a process model against object life cycles.

A process model *conforms* when it induces only object state transitions
the life cycle defines, and when along every (loop-bounded) trace each
object's effect sequence is a path of that object's machine from its
initial state. It *covers* when, across all traces together, every
transition is induced by some task and every state is visited.

Checks decompose per object: a composite life cycle is checked against its
component machines, since a joint transition is realized by tasks that may
fire its member effects one after the other.
"""

from __future__ import annotations

from dataclasses import dataclass

from .olc import ObjectLifeCycle
from .process_model import ProcessModel
from .traces import enumerate_traces


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    detail: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "subject": self.subject, "detail": self.detail}


@dataclass(frozen=True)
class CheckReport:
    violations: tuple[Violation, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "violations": [v.to_dict() for v in self.violations],
        }


@dataclass(frozen=True)
class ComplianceReport:
    conformance: CheckReport
    coverage: CheckReport
    preservation: CheckReport | None = None

    @property
    def passed(self) -> bool:
        parts = [self.conformance, self.coverage]
        if self.preservation is not None:
            parts.append(self.preservation)
        return all(p.passed for p in parts)

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def all_violations(self) -> tuple[Violation, ...]:
        merged = list(self.conformance.violations) + list(self.coverage.violations)
        if self.preservation is not None:
            merged.extend(self.preservation.violations)
        return tuple(merged)

    def to_dict(self) -> dict:
        data = {
            "verdict": self.verdict,
            "conformance": self.conformance.to_dict(),
            "coverage": self.coverage.to_dict(),
            "violations": [v.to_dict() for v in self.all_violations()],
        }
        if self.preservation is not None:
            data["preservation"] = self.preservation.to_dict()
        return data


def _defined_pairs(
    machines: dict[str, ObjectLifeCycle],
) -> dict[str, dict[tuple[str, str], list[str]]]:
    """Per object: (source, target) -> ids of the transitions realizing it."""
    pairs: dict[str, dict[tuple[str, str], list[str]]] = {}
    for object_id, machine in machines.items():
        table: dict[tuple[str, str], list[str]] = {}
        for t in machine.transitions:
            table.setdefault((t.source, t.target), []).append(t.id)
        pairs[object_id] = table
    return pairs


def check_conformance(
    pm: ProcessModel,
    olc,
    *,
    mode: str = "traces",
    loop_bound: int = 1,
    trace_cap: int | None = None,
) -> CheckReport:
    """Report every life-cycle transition the model induces but the OLC lacks.

    ``mode="structural"`` only checks effect-set membership; the default
    ``"traces"`` mode additionally walks each object's machine along every
    enumerated trace and reports out-of-order effects.
    """
    if mode not in ("traces", "structural"):
        raise ValueError(f"unknown conformance mode: {mode!r}")
    machines = olc.object_machines()
    pairs = _defined_pairs(machines)
    violations: list[Violation] = []

    for task in pm.tasks():
        for effect in task.effects:
            if effect.object_id not in machines:
                violations.append(
                    Violation(
                        "unknown-object",
                        f"task {task.id}",
                        f"effect {effect} names an object the life cycle does not know",
                    )
                )
            elif (effect.source, effect.target) not in pairs[effect.object_id]:
                violations.append(
                    Violation(
                        "undefined-transition",
                        f"task {task.id}",
                        f"effect {effect} matches no life cycle transition",
                    )
                )

    if mode == "traces":
        effects_by_task = {t.id: t.effects for t in pm.tasks()}
        reported: set[tuple] = set()
        for trace in enumerate_traces(pm, loop_bound, cap=trace_cap):
            current = {obj: machine.initial for obj, machine in machines.items()}
            broken: set[str] = set()
            for position, task_id in enumerate(trace):
                for effect in effects_by_task[task_id]:
                    obj = effect.object_id
                    if obj not in machines or obj in broken:
                        continue
                    here = current[obj]
                    enabled = (
                        effect.source == here
                        and (here, effect.target) in pairs[obj]
                    )
                    if enabled:
                        current[obj] = effect.target
                        continue
                    broken.add(obj)
                    key = (obj, here, effect.key())
                    if key not in reported:
                        reported.add(key)
                        prefix = ", ".join(trace[: position + 1])
                        violations.append(
                            Violation(
                                "invalid-order",
                                f"{obj}:{effect.source}->{effect.target}",
                                f"object {obj} is at {here} after [{prefix}]; "
                                f"effect {effect} is not enabled there",
                            )
                        )

    violations.sort(key=lambda v: (v.kind, v.subject, v.detail))
    return CheckReport(tuple(violations))


def check_coverage(
    pm: ProcessModel,
    olc,
    *,
    loop_bound: int = 1,
    trace_cap: int | None = None,
) -> CheckReport:
    """Report life-cycle transitions never induced and states never visited.

    Coverage is taken over the union of all traces: a state counts as
    visited when it is an object's initial state or the target of a
    defined transition some trace induces.
    """
    machines = olc.object_machines()
    pairs = _defined_pairs(machines)
    effects_by_task = {t.id: t.effects for t in pm.tasks()}

    covered: set[tuple[str, str]] = set()
    visited = {(obj, machine.initial) for obj, machine in machines.items()}
    for trace in enumerate_traces(pm, loop_bound, cap=trace_cap):
        for task_id in trace:
            for effect in effects_by_task[task_id]:
                obj = effect.object_id
                if obj not in machines:
                    continue
                ids = pairs[obj].get((effect.source, effect.target))
                if ids:
                    covered.update((obj, tid) for tid in ids)
                    visited.add((obj, effect.target))

    violations: list[Violation] = []
    for obj in sorted(machines):
        machine = machines[obj]
        for t in sorted(machine.transitions, key=lambda t: t.id):
            if (obj, t.id) not in covered:
                violations.append(
                    Violation(
                        "uncovered-transition",
                        f"{obj}:{t.id}",
                        f"no trace induces {t.source}->{t.target} of object {obj}",
                    )
                )
        for s in sorted(machine.states, key=lambda s: s.id):
            if (obj, s.id) not in visited:
                violations.append(
                    Violation(
                        "unvisited-state",
                        f"{obj}:{s.id}",
                        f"no trace reaches state {s.id} of object {obj}",
                    )
                )
    return CheckReport(tuple(violations))


def check_compliance(
    pm: ProcessModel,
    olc,
    *,
    mode: str = "traces",
    loop_bound: int = 1,
    trace_cap: int | None = None,
) -> ComplianceReport:
    """Conformance and coverage together; passes only when both pass."""
    return ComplianceReport(
        conformance=check_conformance(
            pm, olc, mode=mode, loop_bound=loop_bound, trace_cap=trace_cap
        ),
        coverage=check_coverage(pm, olc, loop_bound=loop_bound, trace_cap=trace_cap),
    )
