"""Doubly warped products of Finsler metrics and their block structure.

A doubly warped product of (M1, F1) and (M2, F2) with positive warping
functions f1 on M1 and f2 on M2 carries the squared norm

    F^2(x, u, y, v) = f2(u)^2 F1^2(x, y) + f1(x)^2 F2^2(u, v)

on the product chart.  When f2 is identically 1 (a plain warped product)
the fundamental tensor, spray, and Berwald curvature of the composite
admit closed-form blocks over the factor tensors; this module evaluates
those blocks and checks them against direct computation on the composite
metric, and numerically compares both sides of the classical
factorization statements (Berwald / weakly Berwald / Douglas).

Block keys name the factor of each index: "1:122" is the block with the
upper index on the first factor and lower indices on factors 1, 2, 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .classify import Tolerances, classify, classify_points
from .errors import (EvaluationDomainError, FormulaViolationError,
                     HypothesisViolationError, InvalidWarpingError,
                     MetricDegeneracyError, SchemaError)
from .expressions import (Expr, coordinate_extent, evaluate, expr_from_dict,
                          expr_to_dict, mul, power, shift_indices)
from .jets import taylor_eval
from .metrics import (MetricSpec, SamplingPolicy, _sobol_direction_stream,
                      sample_points, validate_metric)
from .tensors import (berwald_curvature, cartan_raised, cartan_tensor,
                      curvature_bundle, fundamental_tensor,
                      inverse_fundamental_tensor,
                      inverse_metric_fiber_derivatives, spray_coefficients)

__all__ = [
    "DWPSpec", "BlockTensorSample", "dwp_construct", "sample_product_points",
    "dwp_fundamental_blocks", "wp_spray", "wp_berwald_blocks",
    "check_theorem_equivalences", "THEOREM_NAMES",
]

# smallest admissible norm of each factor's share of a sampled fiber vector
MIN_PART_NORM = 0.15

CONDITION_TOL = 1e-8          # sup threshold for the torsion-gradient conditions
SPRAY_FORMULA_TOL = 1e-6      # relative, formula vs direct
BERWALD_FORMULA_TOL = 1e-5    # relative, formula vs direct
ZERO_BLOCK_TOL = 1e-7         # absolute, blocks that must vanish


def _is_constant(e: Expr) -> bool:
    nx, ny = coordinate_extent(e)
    return nx == 0 and ny == 0


@dataclass(frozen=True)
class DWPSpec:
    """Two factor metrics plus warping functions f1(x), f2(u)."""

    m1: MetricSpec
    m2: MetricSpec
    f1: Expr
    f2: Expr

    def __post_init__(self):
        for name, f, m in (("f1", self.f1, self.m1), ("f2", self.f2, self.m2)):
            nx, ny = coordinate_extent(f)
            if ny > 0:
                raise SchemaError(f"warping {name} must depend on base coordinates only")
            if nx > m.dimension:
                raise SchemaError(
                    f"warping {name} uses x^{nx} but its factor has dimension "
                    f"{m.dimension}")

    @property
    def is_wp(self) -> bool:
        """Plain warped product: f2 is the constant 1."""
        return _is_constant(self.f2) and evaluate(self.f2, (), ()) == 1.0

    @property
    def is_proper(self) -> bool:
        """Neither warping function is constant."""
        return not _is_constant(self.f1) and not _is_constant(self.f2)

    def to_dict(self) -> dict:
        return {"m1": self.m1.to_dict(), "m2": self.m2.to_dict(),
                "f1": expr_to_dict(self.f1), "f2": expr_to_dict(self.f2)}

    @staticmethod
    def from_dict(doc: dict, where: str = "$") -> "DWPSpec":
        if not isinstance(doc, dict):
            raise SchemaError(f"warped-product spec at {where} must be an object")
        required = {"m1", "m2", "f1", "f2"}
        if set(doc) != required:
            raise SchemaError(
                f"warped-product spec at {where} must have exactly the keys "
                f"{sorted(required)}, got {sorted(doc)}")
        return DWPSpec(
            m1=MetricSpec.from_dict(doc["m1"], f"{where}.m1"),
            m2=MetricSpec.from_dict(doc["m2"], f"{where}.m2"),
            f1=expr_from_dict(doc["f1"], f"{where}.f1"),
            f2=expr_from_dict(doc["f2"], f"{where}.f2"),
        )

    def split_point(self, x: Sequence[float], y: Sequence[float]):
        n1 = self.m1.dimension
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (x[:n1], x[n1:]), (y[:n1], y[n1:])


def _check_warping_positive(spec: DWPSpec, policy: SamplingPolicy) -> None:
    rng = np.random.default_rng(policy.seed)
    for name, f, m in (("f1", spec.f1, spec.m1), ("f2", spec.f2, spec.m2)):
        lows = np.array([lo for lo, _ in m.chart_box])
        highs = np.array([hi for _, hi in m.chart_box])
        xs = rng.uniform(lows, highs, size=(max(policy.x_count, 8), m.dimension))
        for x in xs:
            v = evaluate(f, x, ())
            if not (np.isfinite(v) and v > 0.0):
                raise InvalidWarpingError(
                    f"warping {name} is not strictly positive at x={x.tolist()} "
                    f"(value {v})")


def dwp_construct(spec: DWPSpec, policy: SamplingPolicy | None = None,
                  validate: bool = True) -> MetricSpec:
    """Composite metric of the doubly warped product, as a plain
    MetricSpec over the concatenated coordinates."""
    policy = policy or SamplingPolicy(x_count=16, fiber_count=8)
    _check_warping_positive(spec, policy)
    n1 = spec.m1.dimension
    f2_shift = shift_indices(spec.f2, n1, n1)
    f1_sq = power(spec.f1, 2)
    f2_sq = power(f2_shift, 2)
    term1 = (spec.m1.F_squared if spec.is_wp
             else mul(f2_sq, spec.m1.F_squared))
    term2 = mul(f1_sq, shift_indices(spec.m2.F_squared, n1, n1))
    composite = MetricSpec(
        dimension=n1 + spec.m2.dimension,
        F_squared=term1 + term2,
        chart_box=spec.m1.chart_box + spec.m2.chart_box,
        label=f"({spec.m1.label}) x ({spec.m2.label})",
        fiber_axis_gap=max(spec.m1.fiber_axis_gap, spec.m2.fiber_axis_gap),
    )
    if validate:
        validate_metric(composite, policy)
    return composite


def sample_product_points(spec: DWPSpec, policy: SamplingPolicy | None = None
                          ) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic samples on the product chart whose fiber vectors keep
    both factor shares away from zero (each factor lives on its slit
    bundle)."""
    policy = policy or SamplingPolicy()
    composite = dwp_construct(spec, validate=False)
    n1 = spec.m1.dimension
    n = composite.dimension
    rng = np.random.default_rng(policy.seed)
    lows = np.array([lo for lo, _ in composite.chart_box])
    highs = np.array([hi for _, hi in composite.chart_box])
    xs = rng.uniform(lows, highs, size=(policy.x_count, n))
    stream = _sobol_direction_stream(n, policy.seed)

    def ok(x: np.ndarray, y: np.ndarray) -> bool:
        if np.linalg.norm(y[:n1]) < MIN_PART_NORM:
            return False
        if np.linalg.norm(y[n1:]) < MIN_PART_NORM:
            return False
        if composite.fiber_axis_gap > 0 and np.min(np.abs(y)) < composite.fiber_axis_gap:
            return False
        try:
            return evaluate(composite.F_squared, x, y) > 0.0
        except EvaluationDomainError:
            return False

    out = []
    for x in xs:
        got = 0
        attempts = 0
        while got < policy.fiber_count:
            y = next(stream)
            attempts += 1
            if ok(x, y):
                out.append((x.copy(), y))
                got += 1
            elif attempts > 4096:
                raise InvalidWarpingError(
                    f"could not sample valid product fiber directions at "
                    f"x={x.tolist()}")
    return out


@dataclass
class BlockTensorSample:
    """Formula blocks, direct blocks, and their deviations at one point."""

    kind: str
    x: tuple[float, ...]
    y: tuple[float, ...]
    formula: dict
    direct: dict
    deviations: dict

    def worst(self) -> tuple[str, float]:
        key = max(self.deviations, key=lambda k: self.deviations[k])
        return key, self.deviations[key]


def _warping_gradient(f: Expr, x: Sequence[float], n: int) -> tuple[float, np.ndarray]:
    """(f(x), gradient of f^2) for a base-only expression."""
    s = taylor_eval(f, x, (), 1, 0)
    val = s.value
    grad = np.array([s.partial(1 + i, ()) for i in range(n)])
    return val, 2.0 * val * grad


def _rel_dev(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale


def dwp_fundamental_blocks(spec: DWPSpec, x: Sequence[float], y: Sequence[float],
                           tol: float = 1e-9) -> BlockTensorSample:
    """Fundamental tensor of a warped product as factor blocks.

    Top-left block is g of the first factor, bottom-right is f1^2 times g
    of the second, the mixed blocks vanish; all four are compared against
    the composite metric's fundamental tensor.
    """
    if not spec.is_wp:
        raise HypothesisViolationError(
            "fundamental blocks are stated for plain warped products (f2 = 1)")
    (x1, u), (y1, v) = spec.split_point(x, y)
    composite = dwp_construct(spec, validate=False)
    direct = fundamental_tensor(composite, x, y).components
    n1 = spec.m1.dimension
    g1 = fundamental_tensor(spec.m1, x1, y1).components
    g2 = fundamental_tensor(spec.m2, u, v).components
    f1v = evaluate(spec.f1, x1, ())
    formula = {"11": g1, "22": f1v ** 2 * g2,
               "12": np.zeros((n1, spec.m2.dimension)),
               "21": np.zeros((spec.m2.dimension, n1))}
    direct_blocks = {"11": direct[:n1, :n1], "22": direct[n1:, n1:],
                     "12": direct[:n1, n1:], "21": direct[n1:, :n1]}
    deviations = {k: float(np.max(np.abs(formula[k] - direct_blocks[k])))
                  for k in formula}
    worst_key = max(deviations, key=lambda k: deviations[k])
    if deviations[worst_key] > tol:
        idx = np.unravel_index(
            np.argmax(np.abs(formula[worst_key] - direct_blocks[worst_key])),
            formula[worst_key].shape)
        raise FormulaViolationError(
            f"fundamental-tensor block {worst_key} deviates by "
            f"{deviations[worst_key]:.3e} (tol {tol:.1e}) at entry {idx}",
            block=worst_key, worst_entry=tuple(int(i) for i in idx),
            deviation=deviations[worst_key], tolerance=tol)
    return BlockTensorSample("fundamental", tuple(map(float, x)),
                             tuple(map(float, y)), formula, direct_blocks,
                             deviations)


def wp_spray(spec: DWPSpec, x: Sequence[float], y: Sequence[float],
             tol: float = SPRAY_FORMULA_TOL) -> BlockTensorSample:
    """Warped-product spray from the factor data, checked against the
    composite spray.

    First-factor block:  G1^i - (1/4) g1^ih (d f1^2/dx^h) F2^2.
    Second-factor block: G2^a + (1/(4 f1^2)) g2^al (dF2^2/dv^l)
                         (d f1^2/dx^k) y^k.
    """
    if not spec.is_wp:
        raise HypothesisViolationError(
            "the spray block formulas are stated for plain warped products (f2 = 1)")
    (x1, u), (y1, v) = spec.split_point(x, y)
    n1, n2 = spec.m1.dimension, spec.m2.dimension
    composite = dwp_construct(spec, validate=False)
    direct = spray_coefficients(composite, x, y).components
    g1inv = inverse_fundamental_tensor(spec.m1, x1, y1).components
    g2inv = inverse_fundamental_tensor(spec.m2, u, v).components
    spray1 = spray_coefficients(spec.m1, x1, y1).components
    spray2 = spray_coefficients(spec.m2, u, v).components
    f1v, df1sq = _warping_gradient(spec.f1, x1, n1)
    s2 = taylor_eval(spec.m2.F_squared, u, v, 0, 1)
    f2sq_val = s2.value
    df2_v = np.array([s2.partial(0, tuple(1 if j == i else 0 for j in range(n2)))
                      for i in range(n2)])
    block1 = spray1 - 0.25 * (g1inv @ df1sq) * f2sq_val
    block2 = spray2 + (float(df1sq @ np.asarray(y1)) / (4.0 * f1v ** 2)) * (
        g2inv @ df2_v)
    formula = {"1": block1, "2": block2}
    direct_blocks = {"1": direct[:n1], "2": direct[n1:]}
    deviations = {k: _rel_dev(formula[k], direct_blocks[k]) for k in formula}
    worst_key = max(deviations, key=lambda k: deviations[k])
    if deviations[worst_key] > tol:
        raise FormulaViolationError(
            f"spray block {worst_key} deviates by {deviations[worst_key]:.3e} "
            f"relative (tol {tol:.1e})",
            block=worst_key, deviation=deviations[worst_key], tolerance=tol)
    return BlockTensorSample("spray", tuple(map(float, x)), tuple(map(float, y)),
                             formula, direct_blocks, deviations)


def _berwald_direct_blocks(b: np.ndarray, n1: int) -> dict:
    """Slice the composite Berwald tensor into the eight factor blocks,
    using one canonical ordering of the (symmetric) lower indices."""
    s1, s2 = slice(0, n1), slice(n1, None)
    return {
        "1:111": b[s1, s1, s1, s1],
        "1:112": b[s1, s1, s1, s2],   # (k, i, l, beta)
        "1:122": b[s1, s1, s2, s2],   # (k, l, alpha, beta)
        "1:222": b[s1, s2, s2, s2],   # (k, alpha, beta, lambda)
        "2:222": b[s2, s2, s2, s2],
        "2:122": b[s2, s1, s2, s2],
        "2:112": b[s2, s1, s1, s2],
        "2:111": b[s2, s1, s1, s1],
    }


def wp_berwald_blocks(spec: DWPSpec, x: Sequence[float], y: Sequence[float],
                      tol: float = BERWALD_FORMULA_TOL,
                      zero_tol: float = ZERO_BLOCK_TOL) -> BlockTensorSample:
    """The eight Berwald blocks of a warped product from factor data.

    With T^kh_(...) the fiber derivatives of the first factor's inverse
    metric and df = d f1^2/dx contracted on h:

      1:111  B1^k_ijl - (1/4) T^kh_ijl df_h F2^2
      1:112  -(1/4) T^kh_il df_h dF2^2/dv^beta
      1:122  -(1/2) T^kh_l df_h g2_ab
      1:222  -df_h g1^kh C2_abl
      2:222  B2^g_abl
      2:111, 2:112, 2:122   zero

    Each block is compared against the composite Berwald tensor; the
    declared-zero blocks are required to vanish in direct computation.
    """
    if not spec.is_wp:
        raise HypothesisViolationError(
            "the Berwald block formulas are stated for plain warped products (f2 = 1)")
    (x1, u), (y1, v) = spec.split_point(x, y)
    n1, n2 = spec.m1.dimension, spec.m2.dimension
    composite = dwp_construct(spec, validate=False)
    direct = berwald_curvature(composite, x, y).components
    direct_blocks = _berwald_direct_blocks(direct, n1)

    b1 = berwald_curvature(spec.m1, x1, y1).components
    b2 = berwald_curvature(spec.m2, u, v).components
    g1inv = inverse_fundamental_tensor(spec.m1, x1, y1).components
    g2 = fundamental_tensor(spec.m2, u, v).components
    c2 = cartan_tensor(spec.m2, u, v).components
    f1v, df1sq = _warping_gradient(spec.f1, x1, n1)
    s2 = taylor_eval(spec.m2.F_squared, u, v, 0, 1)
    f2sq_val = s2.value
    df2_v = np.array([s2.partial(0, tuple(1 if j == i else 0 for j in range(n2)))
                      for i in range(n2)])
    # fiber derivatives of g1^{kh} up to third order
    eps_ctx, ginv_series = inverse_metric_fiber_derivatives(spec.m1, x1, y1, 3)

    def unit(*idx):
        beta = [0] * n1
        for i in idx:
            beta[i] += 1
        return tuple(beta)

    t1 = np.empty((n1, n1, n1))
    t2 = np.empty((n1, n1, n1, n1))
    t3 = np.empty((n1, n1, n1, n1, n1))
    for k in range(n1):
        for h in range(n1):
            s = ginv_series[k][h]
            for l in range(n1):
                t1[k, h, l] = s.partial(0, unit(l))
                for i in range(n1):
                    t2[k, h, i, l] = s.partial(0, unit(i, l))
                    for j in range(n1):
                        t3[k, h, i, j, l] = s.partial(0, unit(i, j, l))
    formula = {
        "1:111": b1 - 0.25 * np.einsum("khijl,h->kijl", t3, df1sq) * f2sq_val,
        "1:112": -0.25 * np.einsum("khil,h,b->kilb", t2, df1sq, df2_v),
        "1:122": -0.5 * np.einsum("khl,h,ab->klab", t1, df1sq, g2),
        "1:222": -np.einsum("h,kh,abl->kabl", df1sq, g1inv, c2),
        "2:222": b2,
        "2:122": np.zeros((n2, n1, n2, n2)),
        "2:112": np.zeros((n2, n1, n1, n2)),
        "2:111": np.zeros((n2, n1, n1, n1)),
    }
    deviations = {k: _rel_dev(formula[k], direct_blocks[k]) for k in formula}
    worst_key = max(deviations, key=lambda k: deviations[k])
    if deviations[worst_key] > tol:
        raise FormulaViolationError(
            f"Berwald block {worst_key} deviates by {deviations[worst_key]:.3e} "
            f"relative (tol {tol:.1e})",
            block=worst_key, deviation=deviations[worst_key], tolerance=tol)
    for key in ("2:122", "2:112", "2:111"):
        sup = float(np.max(np.abs(direct_blocks[key]))) if direct_blocks[key].size else 0.0
        if sup > zero_tol:
            raise FormulaViolationError(
                f"declared-zero Berwald block {key} has direct sup-norm "
                f"{sup:.3e} (tol {zero_tol:.1e})",
                block=key, deviation=sup, tolerance=zero_tol)
    return BlockTensorSample("berwald", tuple(map(float, x)),
                             tuple(map(float, y)), formula, direct_blocks,
                             deviations)


# ---------------------------------------------------------------------------
# numeric checks of the factorization statements

THEOREM_NAMES = (
    "berwald_factorization",
    "berwald_warped",
    "weakly_berwald_factorization",
    "douglas_warped",
    "isotropic_mean_berwald",
)


def _condition_star_sup(m: MetricSpec, f: Expr, policy: SamplingPolicy) -> float:
    """sup over samples of || C^ij_k df/dx_i || for the factor metric."""
    sup = 0.0
    for x, y in sample_points(m, policy):
        raised, _ = cartan_raised(m, x, y)
        s = taylor_eval(f, x, (), 1, 0)
        grad = np.array([s.partial(1 + i, ()) for i in range(m.dimension)])
        r = np.einsum("ijk,i->jk", raised.components, grad)
        sup = max(sup, float(np.max(np.abs(r))))
    return sup


def _mean_condition_sup(m: MetricSpec, f: Expr, policy: SamplingPolicy) -> float:
    """sup over samples of | C^gn_g df/dx_n | (traced torsion form)."""
    sup = 0.0
    for x, y in sample_points(m, policy):
        raised, _ = cartan_raised(m, x, y)
        mean = np.einsum("gng->n", raised.components)
        s = taylor_eval(f, x, (), 1, 0)
        grad = np.array([s.partial(1 + i, ()) for i in range(m.dimension)])
        sup = max(sup, abs(float(mean @ grad)))
    return sup


def _isotropy_sup(composite: MetricSpec, pts, scalar: float) -> float:
    """sup deviation of E from ((n+1)/2) c F^-1 h, with h the angular form."""
    n = composite.dimension
    sup = 0.0
    for x, y in pts:
        g = fundamental_tensor(composite, x, y).components
        f2 = evaluate(composite.F_squared, x, y)
        gy = g @ np.asarray(y)
        h = g - np.outer(gy, gy) / f2
        e = curvature_bundle(composite, x, y)["mean_berwald"].components
        target = 0.5 * (n + 1) * scalar * h / np.sqrt(f2)
        sup = max(sup, float(np.max(np.abs(e - target))))
    return sup


def check_theorem_equivalences(spec: DWPSpec, policy: SamplingPolicy | None = None,
                               theorems: Sequence[str] | None = None,
                               tolerances: Tolerances | None = None,
                               condition_tol: float = CONDITION_TOL,
                               isotropy_scalar: float | None = None,
                               fd_fraction: float = 0.0) -> dict:
    """Evaluate both sides of the factorization statements on samples.

    Each entry reports the composite-side verdict, the factor-side
    verdicts and condition sup-norms, and whether they agree.  A
    disagreement is reported, never asserted: at tolerance boundaries
    both verdicts are legitimate readings of the samples.  Requesting a
    theorem whose hypothesis the spec violates raises
    ``HypothesisViolationError``; auto-selected theorems are skipped with
    a notice instead.
    """
    policy = policy or SamplingPolicy(x_count=12, fiber_count=8)
    tol = tolerances or Tolerances()
    requested = list(theorems) if theorems is not None else None
    for name in requested or ():
        if name not in THEOREM_NAMES:
            raise SchemaError(f"unknown theorem check {name!r}; "
                              f"choose from {list(THEOREM_NAMES)}")
    composite = dwp_construct(spec, validate=False)
    pts = sample_product_points(spec, policy)
    f1_const = _is_constant(spec.f1)
    f2_const = _is_constant(spec.f2)

    comp_report = classify_points(composite, pts, policy.seed, tol, fd_fraction)
    m1_report = classify(spec.m1, policy, tol, fd_fraction)
    m2_report = classify(spec.m2, policy, tol, fd_fraction)
    cond1 = _condition_star_sup(spec.m1, spec.f1, policy)
    cond2 = _condition_star_sup(spec.m2, spec.f2, policy)
    cond2_traced = _mean_condition_sup(spec.m2, spec.f2, policy)

    out: dict = {"theorems": {}, "composite": comp_report.to_dict(),
                 "factor1": m1_report.to_dict(), "factor2": m2_report.to_dict(),
                 "condition_sups": {"factor1": cond1, "factor2": cond2,
                                    "factor2_traced": cond2_traced},
                 "condition_tolerance": condition_tol}

    def run(name: str, hypothesis_ok: bool, reason: str, left: bool,
            right: bool, detail: dict) -> None:
        selected = requested is None or name in requested
        if not selected:
            return
        if not hypothesis_ok:
            if requested is not None:
                raise HypothesisViolationError(
                    f"theorem check {name!r} does not apply: {reason}")
            out["theorems"][name] = {"skipped": reason}
            return
        out["theorems"][name] = {
            "left": bool(left), "right": bool(right),
            "agree": bool(left) == bool(right), **detail}

    c1_ok = cond1 <= condition_tol
    c2_ok = cond2 <= condition_tol
    c2t_ok = cond2_traced <= condition_tol

    # composite Berwald, one warping constant: the passive factor must be
    # Riemannian, the active factor Berwald, and the active factor's
    # torsion must annihilate the active warping gradient
    if f1_const and f2_const:
        right_b = m1_report.verdicts["berwald"] and m2_report.verdicts["berwald"]
        detail = {"case": "direct product"}
    elif f2_const:
        right_b = (m2_report.verdicts["riemannian"]
                   and m1_report.verdicts["berwald"] and c1_ok)
        detail = {"case": "active warping on factor 1",
                  "condition_sup": cond1}
    elif f1_const:
        right_b = (m1_report.verdicts["riemannian"]
                   and m2_report.verdicts["berwald"] and c2_ok)
        detail = {"case": "active warping on factor 2",
                  "condition_sup": cond2}
    else:
        right_b, detail = False, {}
    run("berwald_factorization", f1_const or f2_const,
        "needs at least one constant warping function",
        comp_report.verdicts["berwald"], right_b, detail)

    run("berwald_warped", spec.is_wp and not _is_constant(spec.f1),
        "needs a proper plain warped product (f2 = 1, f1 nonconstant)",
        comp_report.verdicts["berwald"],
        (m2_report.verdicts["riemannian"] and m1_report.verdicts["berwald"]
         and c1_ok),
        {"condition_sup": cond1})

    run("weakly_berwald_factorization", spec.is_proper,
        "needs a proper doubly warped product (both warpings nonconstant)",
        comp_report.verdicts["weakly_berwald"],
        (m1_report.verdicts["weakly_berwald"]
         and m2_report.verdicts["weakly_berwald"] and c1_ok and c2t_ok),
        {"condition_sups": [cond1, cond2_traced]})

    run("douglas_warped", spec.is_wp and not _is_constant(spec.f1),
        "needs a proper plain warped product (f2 = 1, f1 nonconstant)",
        comp_report.verdicts["douglas"],
        (m2_report.verdicts["riemannian"] and m1_report.verdicts["berwald"]
         and c1_ok),
        {"condition_sup": cond1})

    if isotropy_scalar is None:
        if requested is not None and "isotropic_mean_berwald" in requested:
            raise HypothesisViolationError(
                "isotropic_mean_berwald needs an isotropy scalar; none supplied")
        out["theorems"]["isotropic_mean_berwald"] = {
            "skipped": "no isotropy scalar supplied; the isotropy shape is "
                       "otherwise underdetermined"}
    else:
        iso_sup = _isotropy_sup(composite, pts, isotropy_scalar)
        premises = iso_sup <= tol.weakly_berwald and (c1_ok or c2t_ok)
        conclusion = comp_report.verdicts["weakly_berwald"]
        out["theorems"]["isotropic_mean_berwald"] = {
            "left": bool(premises), "right": bool(conclusion),
            "agree": bool((not premises) or conclusion),
            "isotropy_sup": iso_sup,
            "condition_sups": [cond1, cond2_traced],
        }
    return out
