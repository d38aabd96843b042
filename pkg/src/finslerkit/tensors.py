"""Pointwise Finsler tensors.

Everything here is derived from fiber and base derivatives of F^2 at a
single point, obtained from the truncated-Taylor engine:

* fundamental tensor      g_ij = 1/2 d^2 F^2 / dy^i dy^j
* Cartan torsion          C_ijk = 1/4 d^3 F^2 / dy^i dy^j dy^k
* spray coefficients      G^i = 1/4 g^il ( d^2F^2/dx^k dy^l y^k - dF^2/dx^l )
* Berwald curvature       B^i_jkl = d^3 G^i / dy^j dy^k dy^l
* mean Berwald curvature  E_jk = 1/2 B^m_jkm
* Douglas curvature       D^i_jkl = B^i_jkl - 2/(n+1) { E_jk d^i_l
                            + E_jl d^i_k + E_kl d^i_j + dE_jk/dy^l y^i }

Fiber derivatives of spray-level quantities are computed by running the
whole spray evaluation (including the matrix inverse) in a perturbation
algebra around y, so a Berwald tensor needs fiber expansions of g to
third order, i.e. fifth-order fiber information of F^2, and the Douglas
trace term needs sixth.  All of it is exact to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import IllConditionedMetricError, MetricDegeneracyError
from .jets import taylor_eval
from .metrics import MetricSpec
from .taylor import Series, get_context

__all__ = [
    "TensorSample", "fundamental_tensor", "inverse_fundamental_tensor",
    "cartan_tensor", "cartan_raised", "spray_coefficients",
    "berwald_curvature", "mean_berwald", "douglas_curvature",
    "curvature_bundle", "inverse_metric_fiber_derivatives",
]

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class TensorSample:
    """A tensor value at one point of the slit tangent bundle.

    ``arity`` counts (upper, lower) index slots; ``provenance`` records
    which derivative engine produced the components.
    """

    arity: tuple[int, int]
    x: tuple[float, ...]
    y: tuple[float, ...]
    components: np.ndarray
    provenance: str = "jet"

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.components)))

    def to_dict(self) -> dict:
        return {
            "arity": list(self.arity),
            "x": list(self.x),
            "y": list(self.y),
            "components": self.components.tolist(),
            "provenance": self.provenance,
        }


def _pt(x, y):
    return tuple(float(v) for v in x), tuple(float(v) for v in y)


def _unit(n: int, *idx: int) -> tuple[int, ...]:
    beta = [0] * n
    for i in idx:
        beta[i] += 1
    return tuple(beta)


def _spd_eigenvalues(g: np.ndarray, x, y, label: str) -> np.ndarray:
    if not np.all(np.isfinite(g)):
        raise MetricDegeneracyError(
            f"non-finite fundamental tensor for {label!r} at x={list(x)}, y={list(y)}")
    eigs = np.linalg.eigvalsh(g)
    if eigs[0] <= 0.0:
        raise MetricDegeneracyError(
            f"fundamental tensor of {label!r} not positive definite at "
            f"x={list(x)}, y={list(y)}; eigenvalues {eigs.tolist()}",
            eigenvalues=eigs.tolist())
    return eigs


def fundamental_tensor(m: MetricSpec, x: Sequence[float], y: Sequence[float]
                       ) -> TensorSample:
    """Half the fiber Hessian of F^2; checked positive definite."""
    n = m.dimension
    s = taylor_eval(m.F_squared, x, y, 0, 2)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = 0.5 * s.partial(0, _unit(n, i, j))
    _spd_eigenvalues(g, x, y, m.label)
    px, py = _pt(x, y)
    return TensorSample((0, 2), px, py, g)


def inverse_fundamental_tensor(m: MetricSpec, x: Sequence[float],
                               y: Sequence[float]) -> TensorSample:
    """Matrix inverse of the fundamental tensor, Newton-polished so that
    g^ij g_jk reproduces the identity to near round-off."""
    sample = fundamental_tensor(m, x, y)
    g = sample.components
    eigs = np.linalg.eigvalsh(g)
    cond = float(eigs[-1] / eigs[0])
    if cond > CONDITION_LIMIT:
        raise IllConditionedMetricError(
            f"fundamental tensor of {m.label!r} has condition number "
            f"{cond:.3e} at x={list(x)}, y={list(y)}", condition_number=cond)
    inv = np.linalg.inv(g)
    inv = inv @ (2.0 * np.eye(m.dimension) - g @ inv)
    inv = 0.5 * (inv + inv.T)
    return TensorSample((2, 0), sample.x, sample.y, inv)


def cartan_tensor(m: MetricSpec, x: Sequence[float], y: Sequence[float]
                  ) -> TensorSample:
    """Quarter of the third fiber derivative of F^2; totally symmetric and
    zero exactly when the metric is fiberwise quadratic."""
    n = m.dimension
    s = taylor_eval(m.F_squared, x, y, 0, 3)
    c = np.empty((n, n, n))
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                v = 0.25 * s.partial(0, _unit(n, i, j, k))
                for perm in {(i, j, k), (i, k, j), (j, i, k),
                             (j, k, i), (k, i, j), (k, j, i)}:
                    c[perm] = v
    px, py = _pt(x, y)
    return TensorSample((0, 3), px, py, c)


# ---------------------------------------------------------------------------
# perturbation-algebra machinery


def _eps_expansion(master: Series, eps_ctx, slot: int, delta: tuple[int, ...]) -> Series:
    """Series (in fiber perturbations eps) of the mixed partial d^delta F^2
    taken from a master expansion, evaluated at y + eps."""
    mctx = master.ctx
    out = np.zeros((1, eps_ctx.n_monos))
    for j, beta in enumerate(eps_ctx.monomials):
        gamma = tuple(d + b for d, b in zip(delta, beta))
        gi = mctx.m_index[gamma]
        out[0, j] = master.c[slot, gi] * mctx.factorials[gi] / eps_ctx.factorials[j]
    return Series(eps_ctx, out)


def _series_matmul(a, b):
    n = len(a)
    p = len(b[0])
    return [[sum((a[i][k] * b[k][j] for k in range(1, len(b))),
                 a[i][0] * b[0][j]) for j in range(p)] for i in range(n)]


def _series_matrix_inverse(gmat, eps_ctx, order: int, m: MetricSpec, x, y):
    """Invert a matrix of series by Newton iteration from the numeric
    inverse of the constant term; exact through the truncation order."""
    n = len(gmat)
    g0 = np.array([[gmat[i][j].value for j in range(n)] for i in range(n)])
    eigs = _spd_eigenvalues(g0, x, y, m.label)
    cond = float(eigs[-1] / eigs[0])
    if cond > CONDITION_LIMIT:
        raise IllConditionedMetricError(
            f"fundamental tensor of {m.label!r} has condition number "
            f"{cond:.3e} at x={list(x)}, y={list(y)}", condition_number=cond)
    inv0 = np.linalg.inv(g0)
    xm = [[eps_ctx.constant(inv0[i, j]) for j in range(n)] for i in range(n)]
    iters = max(1, math.ceil(math.log2(order + 1)) if order > 0 else 1) + 1
    for _ in range(iters):
        ax = _series_matmul(gmat, xm)
        r = [[(-ax[i][j] if i != j else 2.0 - ax[i][j]) for j in range(n)]
             for i in range(n)]
        xm = _series_matmul(xm, r)
    return xm


def _metric_series(m: MetricSpec, x, y, order: int, with_base: bool):
    """Master expansion of F^2 plus the fiber-perturbation series of g."""
    n = m.dimension
    master = taylor_eval(m.F_squared, x, y, 1 if with_base else 0, order + 2)
    eps_ctx = get_context(0, n, 0, order)
    g = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            s = 0.5 * _eps_expansion(master, eps_ctx, 0, _unit(n, i, j))
            g[i][j] = s
            g[j][i] = s
    return master, eps_ctx, g


def inverse_metric_fiber_derivatives(m: MetricSpec, x: Sequence[float],
                                     y: Sequence[float], order: int):
    """Fiber-perturbation series of g^ij up to the given order; the
    ingredient for dg^ij/dy^k and the warped-product curvature blocks."""
    _, eps_ctx, g = _metric_series(m, x, y, order, with_base=False)
    ginv = _series_matrix_inverse(g, eps_ctx, order, m, x, y)
    return eps_ctx, ginv


def _spray_series(m: MetricSpec, x, y, order: int):
    """Fiber-perturbation series of the spray coefficients around y."""
    n = m.dimension
    master, eps_ctx, g = _metric_series(m, x, y, order, with_base=True)
    ginv = _series_matrix_inverse(g, eps_ctx, order, m, x, y)
    yv = [eps_ctx.fiber_variable(k, float(y[k])) for k in range(n)]
    bracket = []
    for l in range(n):
        el = _unit(n, l)
        acc = _eps_expansion(master, eps_ctx, 1 + 0, el) * yv[0]
        for k in range(1, n):
            acc = acc + _eps_expansion(master, eps_ctx, 1 + k, el) * yv[k]
        acc = acc - _eps_expansion(master, eps_ctx, 1 + l, _unit(n))
        bracket.append(acc)
    spray = []
    for i in range(n):
        acc = ginv[i][0] * bracket[0]
        for l in range(1, n):
            acc = acc + ginv[i][l] * bracket[l]
        spray.append(0.25 * acc)
    return eps_ctx, spray


def cartan_raised(m: MetricSpec, x: Sequence[float], y: Sequence[float]
                  ) -> tuple[TensorSample, TensorSample]:
    """Cartan torsion with both leading indices raised, together with the
    fiber derivative of the inverse metric.

    Raising convention: C^ij_k = g^ia g^jb C_abk.  The derivative
    dg^ij/dy^k is obtained by differentiating the inverse itself (series
    inversion), and satisfies dg^ij/dy^k = -2 C^ij_k.
    """
    n = m.dimension
    c = cartan_tensor(m, x, y)
    ginv = inverse_fundamental_tensor(m, x, y)
    raised = np.einsum("ia,jb,abk->ijk", ginv.components, ginv.components,
                       c.components)
    eps_ctx, ginv_series = inverse_metric_fiber_derivatives(m, x, y, 1)
    dginv = np.empty((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                dginv[i, j, k] = ginv_series[i][j].partial(0, _unit(n, k))
    return (TensorSample((2, 1), c.x, c.y, raised),
            TensorSample((2, 1), c.x, c.y, dginv))


def spray_coefficients(m: MetricSpec, x: Sequence[float], y: Sequence[float]
                       ) -> TensorSample:
    """Geodesic spray coefficients; positively 2-homogeneous in y."""
    _, spray = _spray_series(m, x, y, 0)
    g = np.array([s.value for s in spray])
    px, py = _pt(x, y)
    return TensorSample((1, 0), px, py, g)


def _berwald_from_series(eps_ctx, spray, n: int) -> np.ndarray:
    b = np.empty((n, n, n, n))
    for i, s in enumerate(spray):
        for j in range(n):
            for k in range(j, n):
                for l in range(k, n):
                    v = s.partial(0, _unit(n, j, k, l))
                    for perm in {(j, k, l), (j, l, k), (k, j, l),
                                 (k, l, j), (l, j, k), (l, k, j)}:
                        b[(i,) + perm] = v
    return b


def berwald_curvature(m: MetricSpec, x: Sequence[float], y: Sequence[float]
                      ) -> TensorSample:
    """Third fiber derivative of the spray; zero iff the spray is
    quadratic in y (on the sampled fiber)."""
    eps_ctx, spray = _spray_series(m, x, y, 3)
    b = _berwald_from_series(eps_ctx, spray, m.dimension)
    px, py = _pt(x, y)
    return TensorSample((1, 3), px, py, b)


def mean_berwald(m: MetricSpec, x: Sequence[float], y: Sequence[float]
                 ) -> TensorSample:
    """Half the trace of the Berwald curvature."""
    b = berwald_curvature(m, x, y)
    e = 0.5 * np.einsum("mjkm->jk", b.components)
    return TensorSample((0, 2), b.x, b.y, e)


def _douglas_from_parts(b: np.ndarray, e: np.ndarray, de: np.ndarray,
                        y: Sequence[float]) -> np.ndarray:
    n = b.shape[0]
    eye = np.eye(n)
    yv = np.asarray(y, dtype=float)
    trace_part = (np.einsum("jk,il->ijkl", e, eye)
                  + np.einsum("jl,ik->ijkl", e, eye)
                  + np.einsum("kl,ij->ijkl", e, eye)
                  + np.einsum("jkl,i->ijkl", de, yv))
    return b - (2.0 / (n + 1)) * trace_part


def douglas_curvature(m: MetricSpec, x: Sequence[float], y: Sequence[float]
                      ) -> TensorSample:
    """Trace-adjusted projective part of the Berwald curvature; vanishes
    whenever the Berwald curvature does."""
    bundle = curvature_bundle(m, x, y)
    return bundle["douglas"]


def curvature_bundle(m: MetricSpec, x: Sequence[float], y: Sequence[float]
                     ) -> dict:
    """Spray, Berwald, mean Berwald, its fiber derivative, and Douglas
    tensors from a single fourth-order spray expansion."""
    n = m.dimension
    eps_ctx, spray = _spray_series(m, x, y, 4)
    px, py = _pt(x, y)
    g = np.array([s.value for s in spray])
    b = _berwald_from_series(eps_ctx, spray, n)
    e = 0.5 * np.einsum("mjkm->jk", b)
    de = np.empty((n, n, n))
    for j in range(n):
        for k in range(j, n):
            for l in range(n):
                v = 0.0
                for mm in range(n):
                    v += spray[mm].partial(0, _unit(n, j, k, mm, l))
                de[j, k, l] = de[k, j, l] = 0.5 * v
    d = _douglas_from_parts(b, e, de, y)
    return {
        "spray": TensorSample((1, 0), px, py, g),
        "berwald": TensorSample((1, 3), px, py, b),
        "mean_berwald": TensorSample((0, 2), px, py, e),
        "mean_berwald_dy": TensorSample((0, 3), px, py, de),
        "douglas": TensorSample((1, 3), px, py, d),
    }
