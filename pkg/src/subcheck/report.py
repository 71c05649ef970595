"""Report assembly: a stable JSON document plus a fixed-width text rendering.

The JSON document is the machine contract; for one (configuration, seed,
tool version) triple its bytes are identical across runs.  Nothing
time-dependent is embedded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from . import __version__
from .checks import CheckResult, SuiteResult
from .corpus import CorpusInstance, ExpectationDiff
from .submersion import MapAnalysis

__all__ = [
    "RunConfig",
    "entry_report",
    "error_entry",
    "build_document",
    "document_to_json",
    "render_text",
    "EXIT_OK",
    "EXIT_MISMATCH",
    "EXIT_INPUT",
    "EXIT_CONSISTENCY",
]

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_CONSISTENCY = 3


@dataclass(frozen=True)
class RunConfig:
    command: str
    paths: tuple[str, ...]
    seed: int = 42
    points: int | None = None
    tol_override: float | None = None
    only: tuple[str, ...] | None = None
    params: Mapping[str, float] = field(default_factory=dict)
    report: str = "text"
    threads: int = 1

    def echo(self) -> dict:
        return {
            "command": self.command,
            "paths": list(self.paths),
            "seed": self.seed,
            "points": self.points,
            "tol_override": self.tol_override,
            "only": list(self.only) if self.only else None,
            "params": dict(self.params),
            "report": self.report,
            "threads": self.threads,
        }


def _check_dict(r: CheckResult) -> dict:
    return {
        "id": r.id,
        "statement": r.statement,
        "verdict": r.verdict,
        "max_residual": r.max_residual,
        "tolerance": r.tolerance,
        "points": r.points_used,
        "draws": r.draws,
        "direct_residual": r.direct_residual,
        "condition_residual": r.condition_residual,
        "property_holds": r.property_holds,
        "consistency_ok": r.consistency_ok,
        "gate_failures": list(r.gate_failures),
        "notes": list(r.notes),
    }


def _analysis_dict(ma: MapAnalysis, points: int) -> dict:
    rep = ma.representative
    return {
        "verdict": ma.verdict,
        "theta": ma.theta,
        "cos_theta": rep.cos_theta,
        "dims": {
            "kernel": rep.kernel.dim,
            "horizontal": rep.horizontal.dim,
            "d1": rep.d1.dim,
            "d2": rep.d2.dim,
            "omega_d2": rep.omega_d2.dim,
            "mu": rep.mu.dim,
        },
        "angle_spectrum": [float(v) for v in rep.spectrum],
        "theta_deviation": ma.theta_deviation,
        "direct_angle_spread": ma.direct_angle_spread,
        "submersion_residual": ma.max_submersion_residual,
        "boundary": ma.boundary,
        "points": points,
    }


def _expected_dict(diff: ExpectationDiff | None) -> dict | None:
    if diff is None:
        return None
    return {
        "matches": diff.matches,
        "boundary": diff.boundary,
        "details": list(diff.details),
        "declared_verdict": diff.expected_verdict,
        "effective_verdict": diff.effective_verdict,
        "expected_cos_theta": diff.expected_cos_theta,
        "actual_cos_theta": diff.actual_cos_theta,
    }


def entry_report(
    instance: CorpusInstance,
    ma: MapAnalysis,
    points: int,
    diff: ExpectationDiff | None,
    suite: SuiteResult | None,
) -> dict:
    checks = [_check_dict(r) for r in suite.results] if suite else []
    status = "pass"
    if diff is not None and not diff.matches:
        status = "mismatch"
    if suite is not None:
        if suite.failures:
            status = "fail"
        if suite.consistency_failures:
            status = "consistency-failure"
    gates = None
    if suite is not None:
        g = suite.gates
        gates = {
            "parallel_J": g.kahler,
            "parallel_J_residual": g.kahler_residual,
            "single_angle": g.single_angle,
            "umbilical_fibers": g.umbilical,
            "umbilical_residual": g.umbilical_worst,
            "d1_integrable": g.d1_integrable,
        }
    return {
        "entry": instance.entry.name,
        "label": instance.label,
        "file": instance.entry.path,
        "params": dict(instance.params),
        "analysis": _analysis_dict(ma, points),
        "expected": _expected_dict(diff),
        "gates": gates,
        "checks": checks,
        "status": status,
    }


def error_entry(label: str, path: str, message: str) -> dict:
    return {
        "entry": label,
        "label": label,
        "file": path,
        "params": {},
        "analysis": None,
        "expected": None,
        "gates": None,
        "checks": [],
        "status": "error",
        "error": message,
    }


def build_document(config: RunConfig, entries: Sequence[dict]) -> dict:
    counts = {
        "pass": 0,
        "mismatch": 0,
        "fail": 0,
        "rejected": 0,
        "consistency-failure": 0,
        "error": 0,
    }
    checks_pass = checks_fail = checks_vacuous = checks_skipped = 0
    for e in entries:
        counts[e["status"]] = counts.get(e["status"], 0) + 1
        for c in e["checks"]:
            if c["verdict"] == "pass":
                checks_pass += 1
            elif c["verdict"] == "fail":
                checks_fail += 1
            elif c["verdict"] == "vacuous":
                checks_vacuous += 1
            else:
                checks_skipped += 1
    if counts["consistency-failure"]:
        overall, exit_code = "consistency-failure", EXIT_CONSISTENCY
    elif counts["error"]:
        overall, exit_code = "error", EXIT_INPUT
    elif counts["fail"] or counts["mismatch"] or counts["rejected"]:
        overall, exit_code = "fail", EXIT_MISMATCH
    else:
        overall, exit_code = "pass", EXIT_OK
    return {
        "tool": {"name": "subcheck", "version": __version__},
        "schema_version": SCHEMA_VERSION,
        "config": config.echo(),
        "entries": list(entries),
        "counts": {
            "entries": len(entries),
            **counts,
            "checks_pass": checks_pass,
            "checks_fail": checks_fail,
            "checks_vacuous": checks_vacuous,
            "checks_skipped": checks_skipped,
        },
        "overall_status": overall,
        "exit_code": exit_code,
    }


def document_to_json(doc: Mapping[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt_theta(value) -> str:
    return "-" if value is None else f"{value:.9f}"


def _fmt_res(value) -> str:
    return "-" if value is None else f"{value:.3e}"


def render_text(doc: Mapping[str, Any]) -> str:
    lines: list[str] = []
    tool = doc["tool"]
    lines.append(f"{tool['name']} {tool['version']} ({doc['config']['command']})")
    lines.append("")
    header = (
        f"{'entry':36s} {'status':12s} {'verdict':15s} {'theta':>12s} "
        f"{'d1':>3s} {'d2':>3s} {'sub.residual':>13s} {'boundary':>8s}"
    )
    lines.append(header)
    lines.append("-" * len(header))
    for e in doc["entries"]:
        if e["analysis"] is None:
            lines.append(f"{e['label']:36s} {e['status']:12s} {e.get('error', '')}")
            continue
        a = e["analysis"]
        lines.append(
            f"{e['label']:36s} {e['status']:12s} {a['verdict']:15s} "
            f"{_fmt_theta(a['theta']):>12s} {a['dims']['d1']:3d} {a['dims']['d2']:3d} "
            f"{a['submersion_residual']:13.3e} {'yes' if a['boundary'] else 'no':>8s}"
        )
        if e["expected"] is not None and not e["expected"]["matches"]:
            for d in e["expected"]["details"]:
                lines.append(f"    mismatch: {d}")
        if e["checks"]:
            lines.append(f"    {'check':38s} {'verdict':8s} {'residual':>10s} "
                         f"{'tolerance':>10s} {'direct':>10s} {'condition':>10s}")
            for c in e["checks"]:
                lines.append(
                    f"    {c['id']:38s} {c['verdict']:8s} {_fmt_res(c['max_residual']):>10s} "
                    f"{c['tolerance']:10.1e} {_fmt_res(c['direct_residual']):>10s} "
                    f"{_fmt_res(c['condition_residual']):>10s}"
                )
    lines.append("")
    c = doc["counts"]
    lines.append(
        f"entries: {c['entries']}  pass: {c['pass']}  mismatch: {c['mismatch']}  "
        f"fail: {c['fail'] + c['consistency-failure']}  error: {c['error']}"
    )
    if c["checks_pass"] + c["checks_fail"] + c["checks_vacuous"] + c["checks_skipped"]:
        lines.append(
            f"checks:  pass: {c['checks_pass']}  fail: {c['checks_fail']}  "
            f"vacuous: {c['checks_vacuous']}  skipped: {c['checks_skipped']}"
        )
    lines.append(f"overall: {doc['overall_status']}")
    return "\n".join(lines) + "\n"
