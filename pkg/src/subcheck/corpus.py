"""Declarative map definitions with expected analysis results.

A corpus file is TOML with sections ``[map]``, ``[metric]``, ``[J]``,
``[params]``, ``[expected]`` and ``[sampling]`` (see docs/corpus-format.md).
Parameter grids expand into one instance per combination; expected angles are
closed-form expressions in the bound parameters so one file covers a family.
"""

from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import exprs
from .geometry import GeometryError, MetricField, product_J, standard_J
from .linalg import max_principal_angle
from .submersion import (
    MapAnalysis,
    SubmersionMap,
    Tolerances,
)

__all__ = [
    "CorpusError",
    "CorpusEntry",
    "CorpusInstance",
    "ExpectationDiff",
    "load_entry",
    "bundled_corpus_dir",
    "bundled_entries",
    "expected_vs_actual",
]

THETA_TOL = 1e-8


class CorpusError(ValueError):
    """Schema violation in a corpus file, tagged with the offending field."""

    def __init__(self, path, where: str, message: str):
        super().__init__(f"{path}: {where}: {message}")
        self.path = str(path)
        self.where = where


@dataclass(frozen=True)
class CorpusEntry:
    path: str
    name: str
    source_dim: int
    target_dim: int
    components: tuple[str, ...]
    metric_kind: str
    metric_split: tuple[int, int] | None
    warp: str | None
    j_kind: str
    j_split: tuple[int, int] | None
    param_grid: Mapping[str, tuple[float, ...]]
    expected_verdict: str | None
    expected_dims: tuple[int, int] | None
    expected_theta: str | None
    expected_cos_theta: str | None
    expected_d1_span: tuple[tuple[str, ...], ...] | None
    expected_d2_span: tuple[tuple[str, ...], ...] | None
    sampling_box: tuple[tuple[float, float], ...]
    sampling_count: int

    def instances(
        self, overrides: Mapping[str, float] | None = None
    ) -> list["CorpusInstance"]:
        grid = dict(self.param_grid)
        for key, value in (overrides or {}).items():
            if key not in grid:
                raise CorpusError(self.path, "[params]", f"unknown parameter {key!r}")
            grid[key] = (float(value),)
        if not grid:
            return [CorpusInstance(self, {})]
        names = sorted(grid)
        out = []
        for combo in itertools.product(*(grid[k] for k in names)):
            out.append(CorpusInstance(self, dict(zip(names, combo))))
        return out


@dataclass(frozen=True)
class CorpusInstance:
    entry: CorpusEntry
    params: Mapping[str, float]

    @property
    def label(self) -> str:
        if not self.params:
            return self.entry.name
        inner = ",".join(f"{k}={self.params[k]:.6g}" for k in sorted(self.params))
        return f"{self.entry.name}[{inner}]"

    def build_map(self) -> SubmersionMap:
        e = self.entry
        if e.metric_kind == "euclidean":
            metric = MetricField.euclidean(e.source_dim)
        elif e.metric_kind == "product":
            metric = MetricField.product(*e.metric_split)
        else:
            warp_expr = exprs.parse(e.warp, e.metric_split[0], tuple(self.params))
            metric = MetricField.warped_product(
                e.metric_split[0], e.metric_split[1], warp_expr, self.params
            )
        if e.j_kind == "standard":
            jfield = standard_J(e.source_dim)
        else:
            jfield = product_J(standard_J(e.j_split[0]), standard_J(e.j_split[1]))
        return SubmersionMap.from_strings(
            e.source_dim,
            e.target_dim,
            e.components,
            metric=metric,
            jfield=jfield,
            params=self.params,
        )

    def sample_points(self, seed: int, count: int | None = None, index: int = 0) -> np.ndarray:
        rng = np.random.default_rng((seed, 1001, index))
        n = count if count is not None else self.entry.sampling_count
        box = self.entry.sampling_box
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
        return rng.uniform(lo, hi, size=(n, self.entry.source_dim))

    def expected_cos(self) -> float | None:
        e = self.entry
        if e.expected_cos_theta is not None:
            expr = exprs.parse(e.expected_cos_theta, 0, tuple(self.params))
            return abs(exprs.eval_value(expr, [], self.params))
        if e.expected_theta is not None:
            expr = exprs.parse(e.expected_theta, 0, tuple(self.params))
            return abs(float(np.cos(exprs.eval_value(expr, [], self.params))))
        return None

    def expected_theta_value(self) -> float | None:
        e = self.entry
        if e.expected_theta is not None:
            expr = exprs.parse(e.expected_theta, 0, tuple(self.params))
            return float(exprs.eval_value(expr, [], self.params))
        c = self.expected_cos()
        return None if c is None else float(np.arccos(np.clip(c, -1.0, 1.0)))

    def expected_span(self, which: str) -> np.ndarray | None:
        spans = (
            self.entry.expected_d1_span if which == "d1" else self.entry.expected_d2_span
        )
        if spans is None:
            return None
        cols = []
        for vec in spans:
            comp = [
                exprs.eval_value(exprs.parse(c, 0, tuple(self.params)), [], self.params)
                for c in vec
            ]
            cols.append(comp)
        return np.array(cols, dtype=float).T


def _need(table: Mapping[str, Any], key: str, path, where: str):
    if key not in table:
        raise CorpusError(path, where, f"missing required key {key!r}")
    return table[key]


def _parse_split(raw, path, where) -> tuple[int, int]:
    if (
        not isinstance(raw, list)
        or len(raw) != 2
        or not all(isinstance(v, int) and v > 0 for v in raw)
    ):
        raise CorpusError(path, where, "split must be a pair of positive integers")
    return int(raw[0]), int(raw[1])


def load_entry(path) -> CorpusEntry:
    """Load and validate one corpus definition file."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise CorpusError(path, "file", "no such file") from None
    except tomllib.TOMLDecodeError as exc:
        raise CorpusError(path, "file", f"not valid TOML: {exc}") from None

    name = doc.get("name", path.stem)
    mp = _need(doc, "map", path, "[map]")
    source_dim = _need(mp, "source_dim", path, "[map].source_dim")
    target_dim = _need(mp, "target_dim", path, "[map].target_dim")
    if not isinstance(source_dim, int) or source_dim < 2 or source_dim % 2:
        raise CorpusError(path, "[map].source_dim", "must be a positive even integer")
    if not isinstance(target_dim, int) or not 0 < target_dim < source_dim:
        raise CorpusError(path, "[map].target_dim", "must be in (0, source_dim)")
    components = _need(mp, "components", path, "[map].components")
    if not isinstance(components, list) or len(components) != target_dim:
        raise CorpusError(path, "[map].components", f"need exactly {target_dim} expressions")

    params_raw = doc.get("params", {})
    grid: dict[str, tuple[float, ...]] = {}
    for key, value in params_raw.items():
        vals = value if isinstance(value, list) else [value]
        if not vals or not all(isinstance(v, (int, float)) for v in vals):
            raise CorpusError(path, f"[params].{key}", "must be a number or list of numbers")
        grid[key] = tuple(float(v) for v in vals)

    for i, comp in enumerate(components):
        try:
            exprs.parse(comp, source_dim, tuple(grid))
        except exprs.ExprError as exc:
            raise CorpusError(path, f"[map].components[{i}]", str(exc)) from None

    met = doc.get("metric", {"kind": "euclidean"})
    metric_kind = met.get("kind", "euclidean")
    metric_split = None
    warp = None
    if metric_kind not in ("euclidean", "product", "warped_product"):
        raise CorpusError(path, "[metric].kind", f"unknown kind {metric_kind!r}")
    if metric_kind in ("product", "warped_product"):
        metric_split = _parse_split(_need(met, "split", path, "[metric].split"), path, "[metric].split")
        if sum(metric_split) != source_dim:
            raise CorpusError(path, "[metric].split", "factors must sum to source_dim")
    if metric_kind == "warped_product":
        warp = _need(met, "warp", path, "[metric].warp")
        try:
            wexpr = exprs.parse(warp, metric_split[0], tuple(grid))
            MetricField.warped_product(metric_split[0], metric_split[1], wexpr, {})
        except (exprs.ExprError, GeometryError) as exc:
            raise CorpusError(path, "[metric].warp", str(exc)) from None

    jsec = doc.get("J", {"kind": "standard"})
    j_kind = jsec.get("kind", "standard")
    j_split = None
    if j_kind not in ("standard", "product"):
        raise CorpusError(path, "[J].kind", f"unknown kind {j_kind!r}")
    if j_kind == "product":
        j_split = _parse_split(_need(jsec, "split", path, "[J].split"), path, "[J].split")
        if sum(j_split) != source_dim:
            raise CorpusError(path, "[J].split", "factors must sum to source_dim")
        if j_split[0] % 2 or j_split[1] % 2:
            raise CorpusError(path, "[J].split", "each factor dimension must be even")

    exp = doc.get("expected", {})
    expected_verdict = exp.get("verdict")
    from .submersion import VERDICTS

    if expected_verdict is not None and expected_verdict not in VERDICTS:
        raise CorpusError(path, "[expected].verdict", f"unknown verdict {expected_verdict!r}")
    expected_dims = None
    if "dim_d1" in exp or "dim_d2" in exp:
        d1 = _need(exp, "dim_d1", path, "[expected].dim_d1")
        d2 = _need(exp, "dim_d2", path, "[expected].dim_d2")
        if d1 + d2 != source_dim - target_dim:
            raise CorpusError(
                path,
                "[expected]",
                f"dim_d1 + dim_d2 = {d1 + d2} but the kernel has dimension "
                f"{source_dim - target_dim}",
            )
        expected_dims = (int(d1), int(d2))
    expected_theta = exp.get("theta")
    expected_cos_theta = exp.get("cos_theta")
    for key, text in (("theta", expected_theta), ("cos_theta", expected_cos_theta)):
        if text is not None:
            try:
                exprs.parse(text, 0, tuple(grid))
            except exprs.ExprError as exc:
                raise CorpusError(path, f"[expected].{key}", str(exc)) from None

    def parse_span(key):
        raw = exp.get(key)
        if raw is None:
            return None
        out = []
        for i, vec in enumerate(raw):
            if not isinstance(vec, list) or len(vec) != source_dim:
                raise CorpusError(
                    path, f"[expected].{key}[{i}]", f"need {source_dim} component expressions"
                )
            for c in vec:
                try:
                    exprs.parse(str(c), 0, tuple(grid))
                except exprs.ExprError as exc:
                    raise CorpusError(path, f"[expected].{key}[{i}]", str(exc)) from None
            out.append(tuple(str(c) for c in vec))
        return tuple(out)

    expected_d1_span = parse_span("d1_span")
    expected_d2_span = parse_span("d2_span")

    samp = doc.get("sampling", {})
    count = samp.get("count", 100)
    if not isinstance(count, int) or count < 1:
        raise CorpusError(path, "[sampling].count", "must be a positive integer")
    box_raw = samp.get("box", [[-1.0, 1.0]])
    if not isinstance(box_raw, list) or not box_raw:
        raise CorpusError(path, "[sampling].box", "must be a list of [lo, hi] pairs")
    if len(box_raw) == 1:
        box_raw = box_raw * source_dim
    if len(box_raw) != source_dim:
        raise CorpusError(
            path, "[sampling].box", f"need 1 or {source_dim} ranges, got {len(box_raw)}"
        )
    box = []
    for i, pair in enumerate(box_raw):
        if not isinstance(pair, list) or len(pair) != 2 or pair[0] >= pair[1]:
            raise CorpusError(path, f"[sampling].box[{i}]", "must be [lo, hi] with lo < hi")
        box.append((float(pair[0]), float(pair[1])))

    return CorpusEntry(
        path=str(path),
        name=name,
        source_dim=source_dim,
        target_dim=target_dim,
        components=tuple(components),
        metric_kind=metric_kind,
        metric_split=metric_split,
        warp=warp,
        j_kind=j_kind,
        j_split=j_split,
        param_grid=grid,
        expected_verdict=expected_verdict,
        expected_dims=expected_dims,
        expected_theta=expected_theta,
        expected_cos_theta=expected_cos_theta,
        expected_d1_span=expected_d1_span,
        expected_d2_span=expected_d2_span,
        sampling_box=tuple(box),
        sampling_count=count,
    )


def bundled_corpus_dir() -> Path:
    return Path(__file__).parent / "corpus_data" / "v1"


def bundled_entries() -> list[Path]:
    return sorted(bundled_corpus_dir().glob("*.toml"))


@dataclass
class ExpectationDiff:
    matches: bool
    boundary: bool
    details: tuple[str, ...]
    expected_verdict: str | None
    effective_verdict: str | None
    expected_cos_theta: float | None
    actual_cos_theta: float | None


def _effective_class(cos: float, d1: int, d2: int, tol: Tolerances) -> tuple[str, tuple[int, int]]:
    """Class actually reachable by the spectral splitting for a nominal angle.

    A nominal angle with cos^2 within the clustering width of 1 is absorbed
    into the invariant part; a cosine below the right-angle threshold lands in
    the pi/2 classes.
    """
    if cos**2 >= 1.0 - tol.cluster:
        return "invariant", (d1 + d2, 0)
    if cos < tol.right_angle:
        return ("anti-invariant" if d1 == 0 else "semi-invariant"), (d1, d2)
    return ("slant" if d1 == 0 else "semi-slant"), (d1, d2)


def expected_vs_actual(
    instance: CorpusInstance,
    ma: MapAnalysis,
    tol: Tolerances = Tolerances(),
) -> ExpectationDiff:
    """Compare declared expectations against a computed analysis.

    Angle formulas are evaluated at the bound parameters; when the formula
    lands on a classification threshold the comparison reconciles the verdict
    against the class the splitting must produce there and flags the instance
    as a boundary case.
    """
    e = instance.entry
    details: list[str] = []
    boundary = False

    expected_cos = instance.expected_cos()
    expected_verdict = e.expected_verdict
    expected_dims = e.expected_dims
    effective_verdict = expected_verdict
    reconciled = False

    if expected_cos is not None and expected_dims is not None:
        effective_verdict, effective_dims = _effective_class(
            expected_cos, expected_dims[0], expected_dims[1], tol
        )
        if expected_verdict is not None and effective_verdict != expected_verdict:
            boundary = True
            reconciled = True
        check_dims = effective_dims
    else:
        check_dims = expected_dims

    if effective_verdict is not None and ma.verdict != effective_verdict:
        details.append(f"verdict: expected {effective_verdict!r}, got {ma.verdict!r}")
    if check_dims is not None and ma.dims != check_dims:
        details.append(f"dims: expected {check_dims}, got {ma.dims}")

    actual_cos = ma.representative.cos_theta
    if actual_cos is None and ma.dims[1] == 0:
        actual_cos = 1.0  # the angle degenerates when the slant part is absent
    if expected_cos is not None:
        if actual_cos is None:
            details.append("angle: expected a defined angle, got none")
        elif abs(actual_cos - expected_cos) >= THETA_TOL:
            details.append(
                f"angle: |cos(actual) - cos(expected)| = "
                f"{abs(actual_cos - expected_cos):.3e} >= {THETA_TOL}"
            )
        theta_exp = instance.expected_theta_value()
        if (
            theta_exp is not None
            and ma.theta is not None
            and not boundary
            and abs(ma.theta - theta_exp) >= THETA_TOL
        ):
            details.append(
                f"angle: |theta(actual) - theta(expected)| = "
                f"{abs(ma.theta - theta_exp):.3e} >= {THETA_TOL}"
            )

    rep = ma.representative
    for which, frame in (("d1", rep.d1), ("d2", rep.d2)):
        # Declared spans describe the nominal class; they reshuffle when the
        # angle formula lands on a classification threshold.
        if reconciled:
            continue
        span = instance.expected_span(which)
        if span is None:
            continue
        if span.shape[1] != frame.dim:
            details.append(
                f"{which} span: expected dimension {span.shape[1]}, got {frame.dim}"
            )
            continue
        angle = max_principal_angle(span, frame.vectors, rep.metric)
        if angle >= THETA_TOL:
            details.append(f"{which} span: principal angle {angle:.3e} >= {THETA_TOL}")

    return ExpectationDiff(
        matches=not details,
        boundary=boundary or ma.boundary,
        details=tuple(details),
        expected_verdict=expected_verdict,
        effective_verdict=effective_verdict,
        expected_cos_theta=expected_cos,
        actual_cos_theta=actual_cos,
    )
