"""Command-line interface: classify, check, corpus-verify."""

from __future__ import annotations

import os
import sys

import click

from .checks import CATALOG_BY_ID, run_suite
from .corpus import CorpusError, bundled_entries, expected_vs_actual, load_entry
from .report import (
    EXIT_CONSISTENCY,
    EXIT_INPUT,
    RunConfig,
    build_document,
    document_to_json,
    entry_report,
    error_entry,
    render_text,
)
from .submersion import (
    InternalConsistencyError,
    SubmersionError,
    Tolerances,
    analyze_map,
)

__all__ = ["main"]


def _threads() -> int:
    raw = os.environ.get("SUBCHECK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parse_params(pairs) -> dict[str, float]:
    out: dict[str, float] = {}
    for pair in pairs:
        if "=" not in pair:
            raise click.UsageError(f"--param expects name=value, got {pair!r}")
        key, _, value = pair.partition("=")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise click.UsageError(f"--param {key}: {value!r} is not a number") from None
    return out


def _emit(doc, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(document_to_json(doc))
    else:
        sys.stdout.write(render_text(doc))


def _run(config: RunConfig, with_checks: bool) -> int:
    tol = Tolerances()
    entries: list[dict] = []
    instance_counter = 0
    for path in config.paths:
        try:
            entry = load_entry(path)
            instances = entry.instances(config.params or None)
        except CorpusError as exc:
            click.echo(f"error: {exc}", err=True)
            return EXIT_INPUT
        for inst in instances:
            index = instance_counter
            instance_counter += 1
            try:
                f = inst.build_map()
                points = inst.sample_points(config.seed, config.points, index=index)
                if with_checks:
                    suite = run_suite(
                        f,
                        points,
                        seed=config.seed,
                        tol=tol,
                        only=config.only,
                        tol_override=config.tol_override,
                        threads=config.threads,
                    )
                    ma = suite.map_analysis
                else:
                    suite = None
                    import numpy as np

                    ma = analyze_map(
                        f, points, tol, rng=np.random.default_rng((config.seed, 7))
                    )
                diff = expected_vs_actual(inst, ma, tol)
                entries.append(
                    entry_report(inst, ma, len(points), diff, suite)
                )
            except KeyError as exc:
                click.echo(f"error: {exc}", err=True)
                return EXIT_INPUT
            except SubmersionError as exc:
                rejected = error_entry(inst.label, inst.entry.path, str(exc))
                rejected["status"] = "rejected"
                entries.append(rejected)
            except InternalConsistencyError as exc:
                broken = error_entry(inst.label, inst.entry.path, str(exc))
                broken["status"] = "consistency-failure"
                entries.append(broken)
    doc = build_document(config, entries)
    _emit(doc, config.report)
    return doc["exit_code"]


def _common_options(fn):
    fn = click.option("--seed", type=int, default=42, show_default=True, help="Sampling seed.")(fn)
    fn = click.option(
        "--points",
        type=click.IntRange(min=1),
        default=None,
        help="Sample points per instance (defaults to the entry's count).",
    )(fn)
    fn = click.option(
        "--param",
        "params",
        multiple=True,
        metavar="NAME=VALUE",
        help="Bind a parameter, overriding any grid in the file (repeatable).",
    )(fn)
    fn = click.option(
        "--report",
        type=click.Choice(["text", "json"]),
        default="text",
        show_default=True,
        help="Output format.",
    )(fn)
    return fn


@click.group()
@click.version_option()
def main() -> None:
    """Classify submersions between coordinate charts and verify the
    structural identities of their splittings as numerical residuals."""


@main.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path())
@_common_options
def classify(paths, seed, points, params, report):
    """Analyze the vertical/horizontal splitting only (no identity checks)."""
    config = RunConfig(
        command="classify",
        paths=tuple(str(p) for p in paths),
        seed=seed,
        points=points,
        params=_parse_params(params),
        report=report,
        threads=_threads(),
    )
    raise SystemExit(_run(config, with_checks=False))


@main.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path())
@_common_options
@click.option("--tol", type=float, default=None, help="Override every check tolerance.")
@click.option(
    "--only",
    type=str,
    default=None,
    metavar="ID[,ID...]",
    help="Run only the listed check ids.",
)
def check(paths, seed, points, params, report, tol, only):
    """Run the full identity-check suite over each entry."""
    only_ids = tuple(s.strip() for s in only.split(",") if s.strip()) if only else None
    if only_ids:
        unknown = [i for i in only_ids if i not in CATALOG_BY_ID]
        if unknown:
            click.echo(f"error: unknown check ids: {', '.join(unknown)}", err=True)
            raise SystemExit(EXIT_INPUT)
    config = RunConfig(
        command="check",
        paths=tuple(str(p) for p in paths),
        seed=seed,
        points=points,
        tol_override=tol,
        only=only_ids,
        params=_parse_params(params),
        report=report,
        threads=_threads(),
    )
    raise SystemExit(_run(config, with_checks=True))


@main.command("corpus-verify")
@click.option("--seed", type=int, default=42, show_default=True, help="Sampling seed.")
@click.option("--points", type=click.IntRange(min=1), default=None, help="Sample points per instance.")
@click.option("--tol", type=float, default=None, help="Override every check tolerance.")
@click.option(
    "--report",
    type=click.Choice(["text", "json"]),
    default="text",
    show_default=True,
    help="Output format.",
)
def corpus_verify(seed, points, tol, report):
    """Classify and check every bundled corpus entry (the acceptance entry
    point)."""
    config = RunConfig(
        command="corpus-verify",
        paths=tuple(str(p) for p in bundled_entries()),
        seed=seed,
        points=points,
        tol_override=tol,
        report=report,
        threads=_threads(),
    )
    raise SystemExit(_run(config, with_checks=True))


if __name__ == "__main__":
    main()
