"""Metric declarations, sampling, validation, and a small builtin library.

A :class:`MetricSpec` is a chart-local description of a Finsler metric:
the squared norm F^2 as an expression over (x, y), the chart box for the
base coordinates, and an optional exclusion gap around fiber coordinate
hyperplanes for metrics (like the quartic norm) whose fundamental tensor
degenerates there.

Sampling is deterministic: base points are uniform in the chart box from
a seeded generator, fiber directions are scrambled-Sobol points pushed
onto the unit sphere, and invalid draws are replaced from the same
stream, so a (spec, policy) pair always produces the same sample set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import EvaluationDomainError, MetricDegeneracyError, SchemaError
from .expressions import (Expr, add, const, coordinate_extent, evaluate,
                          evaluate_batch, expr_from_dict, expr_to_dict, exp,
                          mul, power, quotient, sqrt, xvar, yvar)
from .jets import taylor_eval

__all__ = [
    "MetricSpec", "SamplingPolicy", "sample_points", "validate_metric",
    "euclidean", "conformal_euclidean", "randers", "randers_linear_drift",
    "randers_cross_drift", "quartic_minkowski", "BUILTIN_METRICS",
]


@dataclass(frozen=True)
class MetricSpec:
    """A Finsler metric on one chart, given by its squared norm."""

    dimension: int
    F_squared: Expr
    chart_box: tuple[tuple[float, float], ...]
    label: str = ""
    fiber_axis_gap: float = 0.0

    def __post_init__(self):
        if self.dimension < 2:
            raise SchemaError("metric dimension must be at least 2")
        box = tuple((float(lo), float(hi)) for lo, hi in self.chart_box)
        if len(box) != self.dimension:
            raise SchemaError(
                f"chart_box has {len(box)} intervals for dimension {self.dimension}")
        for lo, hi in box:
            if not lo < hi:
                raise SchemaError(f"chart interval [{lo}, {hi}] is empty")
        object.__setattr__(self, "chart_box", box)
        nx, ny = coordinate_extent(self.F_squared)
        if nx > self.dimension or ny > self.dimension:
            raise SchemaError(
                f"F_squared uses coordinates up to (x^{nx}, y^{ny}) but the "
                f"declared dimension is {self.dimension}")

    def to_dict(self) -> dict:
        doc = {
            "dimension": self.dimension,
            "F_squared": expr_to_dict(self.F_squared),
            "chart_box": [[lo, hi] for lo, hi in self.chart_box],
            "label": self.label,
        }
        if self.fiber_axis_gap:
            doc["fiber_axis_gap"] = self.fiber_axis_gap
        return doc

    @staticmethod
    def from_dict(doc: dict, where: str = "$") -> "MetricSpec":
        if not isinstance(doc, dict):
            raise SchemaError(f"metric at {where} must be an object")
        allowed = {"dimension", "F_squared", "chart_box", "label", "fiber_axis_gap"}
        unknown = set(doc) - allowed
        if unknown:
            raise SchemaError(f"unknown metric keys at {where}: {sorted(unknown)}")
        for key in ("dimension", "F_squared", "chart_box"):
            if key not in doc:
                raise SchemaError(f"metric at {where} is missing {key!r}")
        if not isinstance(doc["dimension"], int) or isinstance(doc["dimension"], bool):
            raise SchemaError(f"dimension at {where} must be an integer")
        box = doc["chart_box"]
        if (not isinstance(box, list)
                or any(not isinstance(iv, list) or len(iv) != 2 for iv in box)):
            raise SchemaError(f"chart_box at {where} must be a list of [lo, hi] pairs")
        gap = doc.get("fiber_axis_gap", 0.0)
        if not isinstance(gap, (int, float)) or isinstance(gap, bool) or gap < 0:
            raise SchemaError(f"fiber_axis_gap at {where} must be a nonnegative number")
        label = doc.get("label", "")
        if not isinstance(label, str):
            raise SchemaError(f"label at {where} must be a string")
        return MetricSpec(
            dimension=doc["dimension"],
            F_squared=expr_from_dict(doc["F_squared"], f"{where}.F_squared"),
            chart_box=tuple((float(lo), float(hi)) for lo, hi in box),
            label=label,
            fiber_axis_gap=float(gap),
        )


@dataclass(frozen=True)
class SamplingPolicy:
    """Deterministic sample layout: x_count base points, each paired with
    the same fiber_count unit directions."""

    seed: int = 42
    x_count: int = 64
    fiber_count: int = 32


def _sobol_direction_stream(dim: int, seed: int) -> Iterator[np.ndarray]:
    """Endless stream of low-discrepancy unit vectors."""
    sob = qmc.Sobol(d=dim, scramble=True, seed=seed)
    while True:
        block = sob.random(64)
        # push uniform points through the normal quantile, then normalize;
        # guards against the (measure-zero) degenerate draws
        z = ndtri(np.clip(block, 1e-12, 1.0 - 1e-12))
        norms = np.linalg.norm(z, axis=1)
        for row, nrm in zip(z, norms):
            if nrm > 1e-9:
                yield row / nrm


def _direction_ok(m: MetricSpec, x: np.ndarray, y: np.ndarray) -> bool:
    if m.fiber_axis_gap > 0.0 and np.min(np.abs(y)) < m.fiber_axis_gap:
        return False
    try:
        f2 = evaluate(m.F_squared, x, y)
    except EvaluationDomainError:
        return False
    return np.isfinite(f2) and f2 > 0.0


def sample_points(m: MetricSpec, policy: SamplingPolicy | None = None
                  ) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic (x, y) sample pairs satisfying the validity predicates."""
    policy = policy or SamplingPolicy()
    rng = np.random.default_rng(policy.seed)
    lows = np.array([lo for lo, _ in m.chart_box])
    highs = np.array([hi for _, hi in m.chart_box])
    xs = rng.uniform(lows, highs, size=(policy.x_count, m.dimension))
    stream = _sobol_direction_stream(m.dimension, policy.seed)
    directions = [next(stream) for _ in range(policy.fiber_count)]
    out: list[tuple[np.ndarray, np.ndarray]] = []
    for x in xs:
        for y in directions:
            if _direction_ok(m, x, y):
                out.append((x.copy(), y.copy()))
                continue
            # replace this draw from the shared stream, deterministically
            for _ in range(4096):
                cand = next(stream)
                if _direction_ok(m, x, cand):
                    out.append((x.copy(), cand))
                    break
            else:
                raise EvaluationDomainError(
                    f"could not sample a valid fiber direction for metric "
                    f"{m.label!r} at x={x.tolist()}")
    return out


def _fiber_hessian(m: MetricSpec, x: Sequence[float], y: Sequence[float]) -> np.ndarray:
    s = taylor_eval(m.F_squared, x, y, 0, 2)
    n = m.dimension
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            beta = [0] * n
            beta[i] += 1
            beta[j] += 1
            g[i, j] = g[j, i] = 0.5 * s.partial(0, tuple(beta))
    return g


def validate_metric(m: MetricSpec, policy: SamplingPolicy | None = None,
                    homogeneity_tol: float = 1e-9,
                    euler_tol: float = 1e-8) -> dict:
    """Check positivity, fiber 2-homogeneity, and positive definiteness of
    the fundamental tensor on the sample set.  Returns worst deviations;
    raises on violation."""
    pts = sample_points(m, policy)
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    f2 = evaluate_batch(m.F_squared, xs, ys)
    if np.any(f2 <= 0.0):
        i = int(np.argmax(f2 <= 0.0))
        raise MetricDegeneracyError(
            f"F^2 is not positive at x={xs[i].tolist()}, y={ys[i].tolist()}")
    worst_homog = 0.0
    for lam in (0.5, 2.0, 3.0):
        f2_scaled = evaluate_batch(m.F_squared, xs, lam * ys)
        dev = np.abs(f2_scaled - lam ** 2 * f2) / np.maximum(1.0, np.abs(f2_scaled))
        worst_homog = max(worst_homog, float(np.max(dev)))
    if worst_homog > homogeneity_tol:
        raise MetricDegeneracyError(
            f"F^2 is not 2-homogeneous in the fiber: relative deviation "
            f"{worst_homog:.3e} exceeds {homogeneity_tol:.1e}")
    worst_eig = np.inf
    worst_euler = 0.0
    for x, y in pts:
        g = _fiber_hessian(m, x, y)
        eigs = np.linalg.eigvalsh(g)
        worst_eig = min(worst_eig, float(eigs[0]))
        if eigs[0] <= 0.0:
            raise MetricDegeneracyError(
                f"fundamental tensor not positive definite at x={x.tolist()}, "
                f"y={y.tolist()}", eigenvalues=eigs.tolist())
        f2_here = evaluate(m.F_squared, x, y)
        euler = abs(float(y @ g @ y) - f2_here) / max(1.0, abs(f2_here))
        worst_euler = max(worst_euler, euler)
    if worst_euler > euler_tol:
        raise MetricDegeneracyError(
            f"g_y(y, y) deviates from F^2 by {worst_euler:.3e} (tol {euler_tol:.1e})")
    return {
        "samples": len(pts),
        "worst_homogeneity_rel": worst_homog,
        "worst_euler_rel": worst_euler,
        "min_eigenvalue": worst_eig,
    }


# ---------------------------------------------------------------------------
# builtin metrics


def _sum_of_squares(n: int) -> Expr:
    return add(*[power(yvar(i), 2) for i in range(n)])


def _box(n: int, half: float = 0.5) -> tuple[tuple[float, float], ...]:
    return tuple((-half, half) for _ in range(n))


def euclidean(n: int = 2) -> MetricSpec:
    """Flat metric; every curvature in this package vanishes on it."""
    return MetricSpec(n, _sum_of_squares(n), _box(n), label=f"euclidean-{n}d")


def conformal_euclidean(n: int = 2) -> MetricSpec:
    """exp(2 x^1) times the flat quadratic form; Riemannian, non-flat spray."""
    f2 = mul(exp(mul(const(2.0), xvar(0))), _sum_of_squares(n))
    return MetricSpec(n, f2, _box(n), label=f"conformal-euclidean-{n}d")


def _randers_f2(n: int, drift: Expr) -> Expr:
    return power(add(sqrt(_sum_of_squares(n)), mul(drift, yvar(0))), 2)


def randers(b: float = 0.5, n: int = 2) -> MetricSpec:
    """Norm plus constant drift b along y^1; |b| < 1 keeps it positive.
    Locally Minkowski (x-independent), so Berwald but not Riemannian."""
    if not abs(b) < 1.0:
        raise SchemaError("randers drift must satisfy |b| < 1")
    return MetricSpec(n, _randers_f2(n, const(b)), _box(n),
                      label=f"randers-b{b}")


def randers_linear_drift(b0: float = 0.3, slope: float = 0.2, n: int = 2) -> MetricSpec:
    """Drift b(x^1) = b0 + slope * x^1; closed drift form, so Douglas but
    neither Berwald nor weakly Berwald."""
    drift = add(const(b0), mul(const(slope), xvar(0)))
    return MetricSpec(n, _randers_f2(n, drift), _box(n),
                      label=f"randers-drift-{b0}+{slope}x1")


def randers_cross_drift(c: float = 0.2, n: int = 2) -> MetricSpec:
    """Drift b(x^2) = c * x^2 along y^1; the drift form is not closed, so
    the Douglas tensor does not vanish."""
    drift = mul(const(c), xvar(1))
    return MetricSpec(n, _randers_f2(n, drift), _box(n),
                      label=f"randers-cross-{c}x2")


def quartic_minkowski(n: int = 2) -> MetricSpec:
    """F^4 = sum (y^i)^4; x-independent (zero spray) with nonvanishing
    Cartan torsion.  Degenerate where a fiber coordinate vanishes, hence
    the sampling gap around the coordinate hyperplanes."""
    f2 = sqrt(add(*[power(yvar(i), 4) for i in range(n)]))
    return MetricSpec(n, f2, _box(n), label=f"quartic-minkowski-{n}d",
                      fiber_axis_gap=1e-3)


BUILTIN_METRICS = {
    "euclidean": euclidean,
    "conformal-euclidean": conformal_euclidean,
    "randers": randers,
    "randers-linear-drift": randers_linear_drift,
    "randers-cross-drift": randers_cross_drift,
    "quartic-minkowski": quartic_minkowski,
}
