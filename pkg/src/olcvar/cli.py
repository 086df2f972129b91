"""Command-line interface.

Structured JSON goes to stdout (or to ``-o`` files); short human-readable
summaries go to stderr. Exit codes: 0 for PASS verdicts, 1 for FAIL
verdicts, 2 for usage, IO, and parse errors.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__
from .adaptation import adapt_olc, parse_aolc, serialize_aolc
from .compliance import check_compliance
from .errors import OlcvarError, ParseError, StructureError
from .olc import (
    compose,
    dumps,
    loads,
    olc_from_dict,
    parse_lifecycle_bundle,
    serialize_olc,
    sync_from_dict,
    validate_olc,
)
from .process_model import export_dot, parse_model, serialize_model
from .sequence_diagram import parse_sd
from .variants import generate_variant, verify_variant


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise click.ClickException(f"cannot read {path}: {exc}") from exc


def _write(path: str | None, text: str) -> None:
    if path is None:
        click.echo(text, nl=False)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _summary(message: str) -> None:
    click.echo(message, err=True)


def _fail_input(exc: Exception) -> "click.exceptions.Exit":
    _summary(f"error: {exc}")
    return click.exceptions.Exit(2)


@click.group()
@click.version_option(version=__version__, prog_name="olcvar")
def main():
    """Compose object life cycles, check process models against them,
    adapt life cycles with exception cases, and generate model variants."""


@main.command()
@click.option("--olc", "olc_path", type=click.Path(), help="Life cycle or bundle file.")
@click.option("--model", "model_path", type=click.Path(), help="Process model file.")
@click.option("-o", "out", type=click.Path(), help="Write the report here instead of stdout.")
def validate(olc_path, model_path, out):
    """Validate a life cycle and/or a process model; report all problems."""
    if not olc_path and not model_path:
        raise click.UsageError("give --olc and/or --model")
    reports = {}
    try:
        if olc_path:
            lifecycle = parse_lifecycle_bundle(_read(olc_path))
            reports["olc"] = validate_olc(lifecycle).to_dict()
            if getattr(lifecycle, "warnings", ()):
                for w in lifecycle.warnings:
                    _summary(f"warning: {w}")
        if model_path:
            try:
                parse_model(_read(model_path))
                reports["model"] = {"verdict": "PASS", "issues": []}
            except StructureError as exc:
                reports["model"] = {
                    "verdict": "FAIL",
                    "issues": [
                        {
                            "kind": "structure",
                            "subject": model_path,
                            "detail": str(exc),
                            "severity": "error",
                        }
                    ],
                }
    except OlcvarError as exc:
        raise _fail_input(exc)
    verdict = "PASS" if all(r["verdict"] == "PASS" for r in reports.values()) else "FAIL"
    _write(out, dumps({"verdict": verdict, "reports": reports}))
    _summary(f"validate: {verdict}")
    if verdict != "PASS":
        raise click.exceptions.Exit(1)


@main.command(name="compose")
@click.argument("olc_files", nargs=-1, type=click.Path())
@click.option("--sync", "sync_path", type=click.Path(), help="Sync spec JSON file.")
@click.option("-o", "out", type=click.Path(), help="Output file for the composite.")
def compose_cmd(olc_files, sync_path, out):
    """Compose life cycles into their synchronized product.

    Accepts several single-OLC files, or one bundle file with "olcs"/"sync".
    """
    if not olc_files:
        raise click.UsageError("give at least one life cycle file")
    try:
        if len(olc_files) == 1:
            data = loads(_read(olc_files[0]), "life cycle input")
            if "olcs" in data:
                olcs = [olc_from_dict(raw) for raw in data["olcs"]]
                sync = sync_from_dict(data.get("sync", {}))
                if sync_path:
                    sync = sync_from_dict(loads(_read(sync_path), "sync spec"))
                composite = compose(olcs, sync)
            else:
                sync = (
                    sync_from_dict(loads(_read(sync_path), "sync spec"))
                    if sync_path
                    else None
                )
                composite = compose([olc_from_dict(data)], sync)
        else:
            olcs = [olc_from_dict(loads(_read(p), "life cycle")) for p in olc_files]
            sync = (
                sync_from_dict(loads(_read(sync_path), "sync spec")) if sync_path else None
            )
            composite = compose(olcs, sync)
    except OlcvarError as exc:
        raise _fail_input(exc)
    for w in composite.warnings:
        _summary(f"warning: {w}")
    _write(out, serialize_olc(composite))
    _summary(
        f"composed {len(composite.components)} life cycles: "
        f"{len(composite.states)} states, {len(composite.transitions)} transitions"
    )


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--olc", "olc_path", required=True, type=click.Path())
@click.option(
    "--mode",
    type=click.Choice(["traces", "structural"]),
    default="traces",
    show_default=True,
    help="structural checks effect membership only; traces also checks ordering.",
)
@click.option("--loop-bound", type=int, default=1, show_default=True)
@click.option("-o", "out", type=click.Path(), help="Write the report here instead of stdout.")
def check(model_path, olc_path, mode, loop_bound, out):
    """Check a process model's conformance and coverage against a life cycle."""
    try:
        pm = parse_model(_read(model_path))
        lifecycle = parse_lifecycle_bundle(_read(olc_path))
        report = check_compliance(pm, lifecycle, mode=mode, loop_bound=loop_bound)
    except OlcvarError as exc:
        raise _fail_input(exc)
    _write(out, dumps(report.to_dict()))
    _summary(
        f"compliance: {report.verdict} "
        f"(conformance {report.conformance.verdict}, coverage {report.coverage.verdict})"
    )
    if not report.passed:
        raise click.exceptions.Exit(1)


@main.command()
@click.option("--olc", "olc_path", required=True, type=click.Path())
@click.option("--sd", "sd_path", required=True, type=click.Path())
@click.option("--select", "select", help="Insert only this break fragment id.")
@click.option("--all", "insert_all", is_flag=True, help="Insert every break fragment.")
@click.option("-o", "out", type=click.Path(), help="Output file for the adapted life cycle.")
def adapt(olc_path, sd_path, select, insert_all, out):
    """Adapt a life cycle with break fragments from a sequence diagram."""
    if bool(select) == insert_all:
        raise click.UsageError("give exactly one of --select ID or --all")
    try:
        lifecycle = parse_lifecycle_bundle(_read(olc_path))
        sd = parse_sd(_read(sd_path))
        aolc = adapt_olc(lifecycle, sd, select=select if select else None)
    except OlcvarError as exc:
        raise _fail_input(exc)
    _write(out, serialize_aolc(aolc))
    inserted = aolc.inserted_transitions()
    _summary(
        f"adapted with {len(aolc.insertions)} fragment(s), "
        f"{len(inserted)} tagged transition(s)"
    )


@main.command()
@click.option("--base", "base_path", required=True, type=click.Path())
@click.option("--aolc", "aolc_path", required=True, type=click.Path())
@click.option("-o", "out", type=click.Path(), help="Output file for the variant model.")
@click.option("--strict", is_flag=True, help="Verify coverage of the whole adapted life cycle.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["json", "bpmn-xml"]),
    default="json",
    show_default=True,
)
@click.option("--report", "report_path", type=click.Path(), help="Also write the report here.")
def variant(base_path, aolc_path, out, strict, fmt, report_path):
    """Generate a variant from a base model and an adapted life cycle, then verify it.

    The variant goes to -o (report JSON to stdout), or to stdout when -o
    is omitted.
    """
    try:
        bm = parse_model(_read(base_path))
        aolc = parse_aolc(_read(aolc_path))
        vpm = generate_variant(bm, aolc)
        report = verify_variant(vpm, aolc, strict=strict)
    except OlcvarError as exc:
        raise _fail_input(exc)
    serialized = serialize_model(vpm, format=fmt)
    if out:
        _write(out, serialized)
        _write(None, dumps(report.to_dict()))
    else:
        _write(None, serialized)
    if report_path:
        _write(report_path, dumps(report.to_dict()))
    _summary(f"variant {vpm.id}: verify {report.verdict}")
    if not report.passed:
        raise click.exceptions.Exit(1)


@main.command(name="export-dot")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("-o", "out", type=click.Path())
def export_dot_cmd(model_path, out):
    """Export a process model as a Graphviz digraph."""
    try:
        pm = parse_model(_read(model_path))
    except OlcvarError as exc:
        raise _fail_input(exc)
    _write(out, export_dot(pm))
    _summary(f"exported {len(pm.nodes)} nodes")


@main.command()
@click.option("--base", "base_path", required=True, type=click.Path())
@click.option("--olc", "olc_path", required=True, type=click.Path())
@click.option("--sd", "sd_path", required=True, type=click.Path())
@click.option("--select", "select", help="Insert only this break fragment id.")
@click.option("--all", "insert_all", is_flag=True, help="Insert every break fragment.")
@click.option("-o", "out", type=click.Path(), help="Output file for the variant model.")
@click.option("--aolc-out", type=click.Path(), help="Also write the adapted life cycle.")
@click.option("--report", "report_path", type=click.Path(), help="Also write the report.")
@click.option("--strict", is_flag=True)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["json", "bpmn-xml"]),
    default="json",
    show_default=True,
)
def pipeline(base_path, olc_path, sd_path, select, insert_all, out, aolc_out, report_path, strict, fmt):
    """Run adapt, variant generation, and verification in one go.

    Stdout receives a bundle with the adapted life cycle, the variant, and
    the verification report; exit code follows the verdict.
    """
    if bool(select) == insert_all:
        raise click.UsageError("give exactly one of --select ID or --all")
    try:
        bm = parse_model(_read(base_path))
        lifecycle = parse_lifecycle_bundle(_read(olc_path))
        sd = parse_sd(_read(sd_path))
        aolc = adapt_olc(lifecycle, sd, select=select if select else None)
        vpm = generate_variant(bm, aolc)
        report = verify_variant(vpm, aolc, strict=strict)
    except OlcvarError as exc:
        raise _fail_input(exc)

    from .adaptation import aolc_to_dict
    from .process_model import model_to_dict

    bundle = {
        "verdict": report.verdict,
        "aolc": aolc_to_dict(aolc),
        "variant": model_to_dict(vpm),
        "report": report.to_dict(),
    }
    _write(None, dumps(bundle))
    if out:
        _write(out, serialize_model(vpm, format=fmt))
    if aolc_out:
        _write(aolc_out, serialize_aolc(aolc))
    if report_path:
        _write(report_path, dumps(report.to_dict()))
    _summary(
        f"pipeline: {len(aolc.insertions)} fragment(s) applied, verify {report.verdict}"
    )
    if not report.passed:
        raise click.exceptions.Exit(1)


if __name__ == "__main__":
    main()
