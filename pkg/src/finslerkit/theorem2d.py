"""Two-dimensional rigidity pipeline.

The object of study is the condition that the fiber derivative of the
inverse fundamental tensor annihilates the base gradient of a scalar f:

    sum_i  dg^ij/dy^k  df/dx^i  =  0.

On a 2-dimensional chart this forces the metric to be fiberwise
quadratic whenever f is nonconstant.  The mechanical verification walks
the argument forwards: given coefficient functions c^1, c^2 and a
gradient field (A_1, A_2) with A_j = df/dx^j, the squared norm solves
the transport equation

    c^1 du/dy^1 + c^2 du/dy^2 = 2 A_1 y^1 + 2 A_2 y^2,

whose fiberwise 2-homogeneous solutions are the quadratic family

    u = (A_1/c^1) (y^1)^2 + (A_2/c^2) (y^2)^2 + a (c^2 y^1 - c^1 y^2)^2.

The pipeline reconstructs u, recovers f from (A_1, A_2) by path
integration, and confirms that the transport residual, the condition
residual, and the Cartan torsion of the reconstructed metric all vanish
at tolerance.  A seeded exploratory probe searches 3-dimensional metric
families for small condition residuals with nonvanishing torsion; it
records, it never adjudicates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (EvaluationDomainError, InvalidCaseError,
                     MetricDegeneracyError, NotAFinslerMetricError, SchemaError)
from .expressions import (Expr, add, const, coordinate_extent, evaluate,
                          expr_from_dict, expr_to_dict, mul, power, quotient,
                          sqrt, xvar, yvar)
from .fd import outer_step, richardson_diff
from .jets import taylor_eval
from .metrics import MetricSpec, SamplingPolicy, quartic_minkowski
from .tensors import cartan_raised, cartan_tensor, fundamental_tensor, \
    inverse_fundamental_tensor

__all__ = [
    "Theorem2DCase", "ConditionResidual", "condition_star_residual",
    "condition_star_from_gradient", "reconstruct_F2", "quadratic_form",
    "characteristic_residual", "recover_potential", "verify_main_theorem",
    "random_case", "probe_n3",
]


@dataclass(frozen=True)
class Theorem2DCase:
    """Reconstruction data: transport coefficients c^i(x), gradient field
    A_j(x), and the quadratic coefficient a of the homogeneous part."""

    c1: Expr
    c2: Expr
    A1: Expr
    A2: Expr
    a: float
    chart_box: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        for name, e in (("c1", self.c1), ("c2", self.c2),
                        ("A1", self.A1), ("A2", self.A2)):
            nx, ny = coordinate_extent(e)
            if ny > 0:
                raise SchemaError(f"{name} must depend on base coordinates only")
            if nx > 2:
                raise SchemaError(f"{name} uses x^{nx} on a 2-dimensional chart")
        box = tuple((float(lo), float(hi)) for lo, hi in self.chart_box)
        if len(box) != 2 or any(not lo < hi for lo, hi in box):
            raise SchemaError("chart_box must be two nonempty intervals")
        object.__setattr__(self, "chart_box", box)

    def to_dict(self) -> dict:
        return {"c": [expr_to_dict(self.c1), expr_to_dict(self.c2)],
                "A": [expr_to_dict(self.A1), expr_to_dict(self.A2)],
                "a": self.a,
                "chart_box": [[lo, hi] for lo, hi in self.chart_box]}

    @staticmethod
    def from_dict(doc: dict, where: str = "$") -> "Theorem2DCase":
        if not isinstance(doc, dict):
            raise SchemaError(f"case at {where} must be an object")
        required = {"c", "A", "a", "chart_box"}
        if set(doc) != required:
            raise SchemaError(
                f"case at {where} must have exactly the keys {sorted(required)}, "
                f"got {sorted(doc)}")
        for key in ("c", "A"):
            if not isinstance(doc[key], list) or len(doc[key]) != 2:
                raise SchemaError(f"{key} at {where} must be a list of 2 expressions")
        if not isinstance(doc["a"], (int, float)) or isinstance(doc["a"], bool):
            raise SchemaError(f"a at {where} must be a number")
        box = doc["chart_box"]
        if (not isinstance(box, list) or len(box) != 2
                or any(not isinstance(iv, list) or len(iv) != 2 for iv in box)):
            raise SchemaError(f"chart_box at {where} must be two [lo, hi] pairs")
        return Theorem2DCase(
            c1=expr_from_dict(doc["c"][0], f"{where}.c[0]"),
            c2=expr_from_dict(doc["c"][1], f"{where}.c[1]"),
            A1=expr_from_dict(doc["A"][0], f"{where}.A[0]"),
            A2=expr_from_dict(doc["A"][1], f"{where}.A[1]"),
            a=float(doc["a"]),
            chart_box=tuple((float(lo), float(hi)) for lo, hi in box),
        )

    def values_at(self, x: Sequence[float]) -> tuple[float, float, float, float]:
        return (evaluate(self.c1, x, ()), evaluate(self.c2, x, ()),
                evaluate(self.A1, x, ()), evaluate(self.A2, x, ()))


@dataclass(frozen=True)
class ConditionResidual:
    """Residual tensor R^j_k = sum_i dg^ij/dy^k df/dx^i at one point."""

    x: tuple[float, ...]
    y: tuple[float, ...]
    components: np.ndarray
    sup_norm: float


def condition_star_from_gradient(m: MetricSpec, grad: Sequence[float],
                                 x: Sequence[float], y: Sequence[float]
                                 ) -> ConditionResidual:
    """Residual with an explicit gradient vector (df/dx^1, ..., df/dx^n).

    The gradient is contracted against the first upper slot of
    dg^ij/dy^k; by symmetry of g the slot choice is immaterial.
    """
    _, dginv = cartan_raised(m, x, y)
    r = np.einsum("ijk,i->jk", dginv.components, np.asarray(grad, dtype=float))
    return ConditionResidual(tuple(map(float, x)), tuple(map(float, y)),
                             r, float(np.max(np.abs(r))))


def condition_star_residual(m: MetricSpec, f: Expr, x: Sequence[float],
                            y: Sequence[float]) -> ConditionResidual:
    """Residual for a base-only scalar expression f."""
    nx, ny = coordinate_extent(f)
    if ny > 0:
        raise SchemaError("f must depend on base coordinates only")
    s = taylor_eval(f, x, (), 1, 0)
    grad = [s.partial(1 + i, ()) for i in range(m.dimension)]
    return condition_star_from_gradient(m, grad, x, y)


def quadratic_form(case: Theorem2DCase, x: Sequence[float]) -> np.ndarray:
    """Coefficient matrix Q(x) of the reconstructed squared norm,
    u = Q_11 (y^1)^2 + 2 Q_12 y^1 y^2 + Q_22 (y^2)^2."""
    c1, c2, a1, a2 = case.values_at(x)
    if c1 == 0.0 or c2 == 0.0:
        raise NotAFinslerMetricError(
            f"transport coefficient vanishes at x={list(x)} (c=({c1}, {c2}))")
    a = case.a
    return np.array([
        [a1 / c1 + a * c2 ** 2, -a * c1 * c2],
        [-a * c1 * c2, a2 / c2 + a * c1 ** 2],
    ])


def _check_admissible(case: Theorem2DCase, x: Sequence[float]) -> np.ndarray:
    c1, c2, a1, a2 = case.values_at(x)
    if c1 == 0.0 and c2 == 0.0:
        raise NotAFinslerMetricError(
            f"c^1 and c^2 vanish simultaneously at x={list(x)}")
    if c1 == 0.0 or c2 == 0.0 or a1 / c1 <= 0.0 or a2 / c2 <= 0.0:
        raise NotAFinslerMetricError(
            f"A_i/c^i must be positive at x={list(x)}: got "
            f"({a1}/{c1}, {a2}/{c2})")
    q = quadratic_form(case, x)
    eigs = np.linalg.eigvalsh(q)
    if eigs[0] <= 0.0:
        raise NotAFinslerMetricError(
            f"reconstructed quadratic form not positive definite at "
            f"x={list(x)}; eigenvalues {eigs.tolist()}", eigenvalues=eigs.tolist())
    return q


def reconstruct_F2(case: Theorem2DCase, x: Sequence[float],
                   validate: bool = True) -> MetricSpec:
    """Metric with squared norm from the 2-homogeneous solution family.

    The returned spec covers the whole chart box; admissibility
    (positive diagonal weights and a positive definite form) is checked
    at the given base point and raises ``NotAFinslerMetricError``
    otherwise.
    """
    if validate:
        _check_admissible(case, x)
    y1, y2 = yvar(0), yvar(1)
    skew = mul(case.c2, y1) - mul(case.c1, y2)
    f2 = add(
        mul(quotient(case.A1, case.c1), power(y1, 2)),
        mul(quotient(case.A2, case.c2), power(y2, 2)),
        mul(const(case.a), power(skew, 2)),
    )
    return MetricSpec(2, f2, case.chart_box, label="reconstructed-quadratic")


def characteristic_residual(u: Expr, case: Theorem2DCase, x: Sequence[float],
                            y: Sequence[float]) -> float:
    """Transport-equation residual c^1 du/dy^1 + c^2 du/dy^2
    - 2 A_1 y^1 - 2 A_2 y^2 for a candidate squared norm u."""
    c1, c2, a1, a2 = case.values_at(x)
    s = taylor_eval(u, x, y, 0, 1)
    du1 = s.partial(0, (1, 0))
    du2 = s.partial(0, (0, 1))
    return c1 * du1 + c2 * du2 - 2.0 * a1 * float(y[0]) - 2.0 * a2 * float(y[1])


def integrability_defect(case: Theorem2DCase, xs: Sequence[Sequence[float]]) -> float:
    """sup |dA_1/dx^2 - dA_2/dx^1| over the base points; zero exactly when
    A is locally a gradient."""
    worst = 0.0
    for x in xs:
        s1 = taylor_eval(case.A1, x, (), 1, 0)
        s2 = taylor_eval(case.A2, x, (), 1, 0)
        worst = max(worst, abs(s1.partial(2, ()) - s2.partial(1, ())))
    return worst


def recover_potential(case: Theorem2DCase, panels: int = 256
                      ) -> Callable[[Sequence[float]], float]:
    """Midpoint-rule path integral of (A_1, A_2) from the chart corner,
    along x^1 first and then x^2.  Only the gradient of the result enters
    any later formula, so the integration constant is irrelevant."""
    (lo1, _), (lo2, _) = case.chart_box

    def midpoint(fn: Callable[[float], float], a: float, b: float) -> float:
        if a == b:
            return 0.0
        h = (b - a) / panels
        ts = a + h * (np.arange(panels) + 0.5)
        return float(sum(fn(t) for t in ts) * h)

    def f(x: Sequence[float]) -> float:
        x1, x2 = float(x[0]), float(x[1])
        leg1 = midpoint(lambda t: evaluate(case.A1, (t, lo2), ()), lo1, x1)
        leg2 = midpoint(lambda s: evaluate(case.A2, (x1, s), ()), lo2, x2)
        return leg1 + leg2

    return f


def _circle_directions(count: int) -> np.ndarray:
    angles = (np.arange(count) + 0.5) * (2.0 * np.pi / count)
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def verify_main_theorem(case: Theorem2DCase, policy: SamplingPolicy | None = None,
                        transport_tol: float = 1e-10,
                        condition_tol: float = 1e-8,
                        cartan_tol: float = 1e-8,
                        consistency_tol: float = 1e-9,
                        integrability_tol: float = 1e-9) -> dict:
    """Run the full reconstruction pipeline on sampled points.

    Raises ``InvalidCaseError`` when A is not a gradient and
    ``NotAFinslerMetricError`` when the reconstruction is inadmissible at
    some sample; all other stage failures are reported, with sup-norms,
    in the returned dictionary.
    """
    policy = policy or SamplingPolicy(x_count=16, fiber_count=8)
    rng = np.random.default_rng(policy.seed)
    lows = np.array([lo for lo, _ in case.chart_box])
    highs = np.array([hi for _, hi in case.chart_box])
    xs = rng.uniform(lows, highs, size=(policy.x_count, 2))
    ys = _circle_directions(policy.fiber_count)

    defect = integrability_defect(case, xs)
    if defect > integrability_tol:
        raise InvalidCaseError(
            f"(A_1, A_2) is not a gradient field: integrability defect "
            f"{defect:.3e} exceeds {integrability_tol:.1e}")

    metric = reconstruct_F2(case, xs[0], validate=True)
    for x in xs:
        _check_admissible(case, x)

    potential = recover_potential(case)
    grad_step = outer_step(1)
    sups = {
        "integrability": defect,
        "transport_residual": 0.0,
        "condition_residual": 0.0,
        "cartan": 0.0,
        "consistency": 0.0,
        "fiber_independence": 0.0,
        "gradient_recovery": 0.0,
    }
    y_ref = np.array([0.6, 0.8])
    y_alt = np.array([-0.8, 0.6])
    for x in xs:
        grad = np.empty(2)
        for i in range(2):
            val, _err = richardson_diff(
                lambda p: np.array([potential(p)]), x, (i,), grad_step)
            grad[i] = val[0]
        c1, c2, a1, a2 = case.values_at(x)
        sups["gradient_recovery"] = max(
            sups["gradient_recovery"], float(np.max(np.abs(grad - (a1, a2)))))
        g = fundamental_tensor(metric, x, y_ref).components
        g_alt = fundamental_tensor(metric, x, y_alt).components
        sups["fiber_independence"] = max(
            sups["fiber_independence"], float(np.max(np.abs(g - g_alt))))
        ginv = inverse_fundamental_tensor(metric, x, y_ref).components
        sups["consistency"] = max(
            sups["consistency"],
            float(np.max(np.abs(ginv @ np.array([a1, a2]) - np.array([c1, c2])))))
        for y in ys:
            sups["transport_residual"] = max(
                sups["transport_residual"],
                abs(characteristic_residual(metric.F_squared, case, x, y)))
            res = condition_star_from_gradient(metric, grad, x, y)
            sups["condition_residual"] = max(sups["condition_residual"],
                                             res.sup_norm)
            sups["cartan"] = max(sups["cartan"],
                                 cartan_tensor(metric, x, y).sup_norm())
    stages = [
        ("transport_residual", transport_tol),
        ("condition_residual", condition_tol),
        ("cartan", cartan_tol),
        ("consistency", consistency_tol),
    ]
    failed = [name for name, tol in stages if sups[name] > tol]
    return {
        "status": "PASS" if not failed else "FAIL",
        "failed_stages": failed,
        "sup_norms": sups,
        "tolerances": {name: tol for name, tol in stages},
        "samples": {"x_count": int(policy.x_count),
                    "fiber_count": int(policy.fiber_count),
                    "seed": int(policy.seed)},
    }


# ---------------------------------------------------------------------------
# seeded random cases


def _random_poly(rng: np.random.Generator, degree: int) -> Expr:
    """Polynomial in (x^1, x^2) with coefficients uniform in [-1, 1]."""
    terms = [const(float(rng.uniform(-1.0, 1.0)))]
    for d in range(1, degree + 1):
        for k in range(d + 1):
            coeff = float(rng.uniform(-1.0, 1.0))
            term: Expr = const(coeff)
            if d - k:
                term = mul(term, power(xvar(0), d - k)) if d - k > 1 else mul(term, xvar(0))
            if k:
                term = mul(term, power(xvar(1), k)) if k > 1 else mul(term, xvar(1))
            terms.append(term)
    return add(*terms)


def _poly_gradient(rng: np.random.Generator, degree: int) -> tuple[Expr, Expr]:
    """Gradient (by exact differentiation of a random polynomial potential),
    guaranteeing integrability."""
    grads: list[list[Expr]] = [[], []]
    for d in range(1, degree + 2):
        for k in range(d + 1):
            coeff = float(rng.uniform(-1.0, 1.0))
            p, q = d - k, k     # potential term x1^p x2^q
            if p:
                t: Expr = const(coeff * p)
                if p - 1:
                    t = mul(t, power(xvar(0), p - 1)) if p - 1 > 1 else mul(t, xvar(0))
                if q:
                    t = mul(t, power(xvar(1), q)) if q > 1 else mul(t, xvar(1))
                grads[0].append(t)
            if q:
                t = const(coeff * q)
                if p:
                    t = mul(t, power(xvar(0), p)) if p > 1 else mul(t, xvar(0))
                if q - 1:
                    t = mul(t, power(xvar(1), q - 1)) if q - 1 > 1 else mul(t, xvar(1))
                grads[1].append(t)
    return add(*grads[0]), add(*grads[1])


def random_case(seed: int | np.random.Generator,
                chart_box=((-0.5, 0.5), (-0.5, 0.5)),
                max_tries: int = 20000) -> Theorem2DCase:
    """Rejection-sample an admissible case: polynomial c^i of degree <= 2,
    gradient field A of degree <= 2 from a random potential, and
    a in [-0.2, 1].  Admissibility is enforced with margins on a base
    grid so downstream samples stay well inside the valid region."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    (lo1, hi1), (lo2, hi2) = chart_box
    grid = [(t1, t2)
            for t1 in np.linspace(lo1, hi1, 5)
            for t2 in np.linspace(lo2, hi2, 5)]
    for _ in range(max_tries):
        c1 = _random_poly(rng, 2)
        c2 = _random_poly(rng, 2)
        a1, a2 = _poly_gradient(rng, 1)
        a = float(rng.uniform(-0.2, 1.0))
        case = Theorem2DCase(c1, c2, a1, a2, a, chart_box)
        ok = True
        for x in grid:
            v1, v2, w1, w2 = case.values_at(x)
            if abs(v1) < 1e-2 or abs(v2) < 1e-2:
                ok = False
                break
            if w1 / v1 < 1e-2 or w2 / v2 < 1e-2:
                ok = False
                break
            q = quadratic_form(case, x)
            eigs = np.linalg.eigvalsh(q)
            if eigs[0] < 1e-3:
                ok = False
                break
        if ok:
            return case
    raise InvalidCaseError(
        f"no admissible random case found in {max_tries} draws")


# ---------------------------------------------------------------------------
# exploratory probe in dimension 3


def _randers3(params: np.ndarray) -> MetricSpec:
    """3-dimensional norm-plus-drift family; params packs the constant and
    linear drift coefficients (3 + 9 values)."""
    beta = params[:3]
    gamma = params[3:].reshape(3, 3)
    q = add(*[power(yvar(i), 2) for i in range(3)])
    drift_terms = []
    for i in range(3):
        coeffs: list[Expr] = [const(float(beta[i]))]
        for j in range(3):
            if gamma[i, j] != 0.0:
                coeffs.append(mul(const(float(gamma[i, j])), xvar(j)))
        drift_terms.append(mul(add(*coeffs), yvar(i)))
    f2 = power(add(sqrt(q), *drift_terms), 2)
    return MetricSpec(3, f2, ((-0.5, 0.5),) * 3, label="randers3-probe")


def probe_n3(seed: int = 42, budget: int = 64,
             torsion_floor: float = 0.01) -> dict:
    """Search 3-dimensional families for small condition residuals with
    nonvanishing Cartan torsion.

    Candidate 0 is the x-independent quartic norm with f = x^1 (its
    residual is whatever it is; x-independence does not make the
    contraction vanish).  The rest are seeded norm-plus-drift metrics
    with linear f.  Returns the evaluation log and the best admissible
    candidate by residual sup-norm (ties to the lower index).  No claim
    is made either way; this is a research log.
    """
    rng = np.random.default_rng(seed)
    log: list[dict] = []
    best: dict | None = None
    xs = np.array([[-0.25, 0.1, 0.3], [0.2, -0.3, -0.1], [0.0, 0.25, -0.3]])
    dirs = np.array([
        [0.7, 0.5, 0.51], [-0.55, 0.7, 0.46], [0.6, -0.52, 0.61],
        [0.58, 0.64, -0.5], [0.72, 0.4, -0.57], [-0.45, -0.6, 0.66],
    ])
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)

    def evaluate_candidate(index: int, family: str, m: MetricSpec,
                           grad: np.ndarray, params: list[float]) -> None:
        nonlocal best
        residual_sup = 0.0
        cartan_sup = 0.0
        try:
            for x in xs:
                for y in dirs:
                    res = condition_star_from_gradient(m, grad, x, y)
                    residual_sup = max(residual_sup, res.sup_norm)
                    cartan_sup = max(cartan_sup, cartan_tensor(m, x, y).sup_norm())
        except (EvaluationDomainError, MetricDegeneracyError) as e:
            log.append({"index": index, "family": family, "params": params,
                        "admissible": False, "reason": str(e)})
            return
        record = {
            "index": index, "family": family, "params": params,
            "admissible": bool(cartan_sup >= torsion_floor),
            "residual_sup": residual_sup, "cartan_sup": cartan_sup,
            "gradient": [float(v) for v in grad],
        }
        log.append(record)
        if record["admissible"] and (best is None
                                     or residual_sup < best["residual_sup"]):
            best = record

    count = 0
    if budget > 0:
        evaluate_candidate(0, "quartic-minkowski-3d", quartic_minkowski(3),
                           np.array([1.0, 0.0, 0.0]), [])
        count = 1
    while count < budget:
        params = np.concatenate([
            rng.uniform(-0.35, 0.35, size=3),
            rng.uniform(-0.15, 0.15, size=9),
        ])
        w = rng.uniform(-1.0, 1.0, size=3)
        norm = np.linalg.norm(w)
        if norm < 1e-6:
            continue
        w = w / norm
        evaluate_candidate(count, "randers3-linear-drift", _randers3(params),
                           w, [float(v) for v in params])
        count += 1
    return {"evaluated": count, "best": best, "log": log,
            "seed": int(seed), "budget": int(budget),
            "torsion_floor": torsion_floor}
