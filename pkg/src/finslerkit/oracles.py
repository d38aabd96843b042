"""Independent cross-checks for the tensor operations.

Two families live here.  The finite-difference oracles recompute each
tensor with its outermost derivatives taken by Richardson-extrapolated
central differences instead of Taylor propagation, and report an error
estimate so callers can assert agreement at the honest level.  The
Christoffel oracle rebuilds the spray of a fiberwise-quadratic metric
from the classical connection coefficients, a derivation that never
touches the spray formula being checked.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import OracleFailureError
from .fd import fd_derivative, outer_step, richardson_diff
from .metrics import MetricSpec
from .tensors import (TensorSample, _douglas_from_parts, _pt,
                      fundamental_tensor, inverse_fundamental_tensor,
                      mean_berwald, spray_coefficients)

__all__ = [
    "fundamental_tensor_fd", "cartan_tensor_fd", "dginv_fd", "spray_fd",
    "berwald_fd", "mean_berwald_fd", "douglas_fd", "christoffel_spray",
]


def fundamental_tensor_fd(m: MetricSpec, x: Sequence[float], y: Sequence[float]
                          ) -> tuple[TensorSample, np.ndarray]:
    n = m.dimension
    g = np.empty((n, n))
    err = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            r = fd_derivative(m.F_squared, x, y, y_idx=(i, j))
            g[i, j] = g[j, i] = 0.5 * r.value
            err[i, j] = err[j, i] = 0.5 * r.error
    px, py = _pt(x, y)
    return TensorSample((0, 2), px, py, g, provenance="finite-difference"), err


def cartan_tensor_fd(m: MetricSpec, x: Sequence[float], y: Sequence[float]
                     ) -> tuple[TensorSample, np.ndarray]:
    n = m.dimension
    c = np.empty((n, n, n))
    err = np.empty((n, n, n))
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                r = fd_derivative(m.F_squared, x, y, y_idx=(i, j, k))
                for perm in {(i, j, k), (i, k, j), (j, i, k),
                             (j, k, i), (k, i, j), (k, j, i)}:
                    c[perm] = 0.25 * r.value
                    err[perm] = 0.25 * r.error
    px, py = _pt(x, y)
    return TensorSample((0, 3), px, py, c, provenance="finite-difference"), err


def dginv_fd(m: MetricSpec, x: Sequence[float], y: Sequence[float]
             ) -> tuple[TensorSample, np.ndarray]:
    """dg^ij/dy^k by outer central differences of the numeric inverse."""
    n = m.dimension
    h = outer_step(1, float(np.linalg.norm(y)))

    def inv_at(yv: np.ndarray) -> np.ndarray:
        return inverse_fundamental_tensor(m, x, yv).components

    d = np.empty((n, n, n))
    err = np.empty((n, n, n))
    for k in range(n):
        val, e = richardson_diff(inv_at, y, (k,), h)
        d[:, :, k] = val
        err[:, :, k] = e
    px, py = _pt(x, y)
    return TensorSample((2, 1), px, py, d, provenance="finite-difference"), err


def spray_fd(m: MetricSpec, x: Sequence[float], y: Sequence[float]
             ) -> tuple[TensorSample, np.ndarray]:
    """Spray with every ingredient derivative taken by finite differences."""
    n = m.dimension
    g_fd, g_err = fundamental_tensor_fd(m, x, y)
    g = g_fd.components
    ginv = np.linalg.inv(g)
    ginv = ginv @ (2.0 * np.eye(n) - g @ ginv)
    mixed = np.empty((n, n))     # d^2 F^2 / dx^k dy^l
    mixed_err = np.empty((n, n))
    xd = np.empty(n)             # d F^2 / dx^l
    xd_err = np.empty(n)
    for l in range(n):
        r = fd_derivative(m.F_squared, x, y, x_idx=(l,))
        xd[l], xd_err[l] = r.value, r.error
        for k in range(n):
            r = fd_derivative(m.F_squared, x, y, x_idx=(k,), y_idx=(l,))
            mixed[k, l], mixed_err[k, l] = r.value, r.error
    yv = np.asarray(y, dtype=float)
    bracket = mixed.T @ yv - xd
    spray = 0.25 * ginv @ bracket
    # first-order error budget: ingredient errors through the same formula,
    # plus the inverse perturbed by the g error
    bracket_err = mixed_err.T @ np.abs(yv) + xd_err
    ginv_err = np.abs(ginv) @ g_err @ np.abs(ginv)
    err = 0.25 * (np.abs(ginv) @ bracket_err + ginv_err @ np.abs(bracket))
    if not np.all(np.isfinite(spray)):
        raise OracleFailureError("non-finite finite-difference spray")
    px, py = _pt(x, y)
    return TensorSample((1, 0), px, py, spray, provenance="finite-difference"), err


def berwald_fd(m: MetricSpec, x: Sequence[float], y: Sequence[float]
               ) -> tuple[TensorSample, np.ndarray]:
    """Third outer fiber differences of the (Taylor-computed) spray."""
    n = m.dimension
    h = outer_step(3, float(np.linalg.norm(y)))

    def spray_at(yv: np.ndarray) -> np.ndarray:
        return spray_coefficients(m, x, yv).components

    b = np.empty((n, n, n, n))
    err = np.empty((n, n, n, n))
    for j in range(n):
        for k in range(j, n):
            for l in range(k, n):
                val, e = richardson_diff(spray_at, y, (j, k, l), h)
                for perm in {(j, k, l), (j, l, k), (k, j, l),
                             (k, l, j), (l, j, k), (l, k, j)}:
                    b[(slice(None),) + perm] = val
                    err[(slice(None),) + perm] = e
    px, py = _pt(x, y)
    return TensorSample((1, 3), px, py, b, provenance="finite-difference"), err


def mean_berwald_fd(m: MetricSpec, x: Sequence[float], y: Sequence[float],
                    berwald: tuple[TensorSample, np.ndarray] | None = None
                    ) -> tuple[TensorSample, np.ndarray]:
    b, berr = berwald if berwald is not None else berwald_fd(m, x, y)
    e = 0.5 * np.einsum("mjkm->jk", b.components)
    err = 0.5 * np.einsum("mjkm->jk", berr)
    return TensorSample((0, 2), b.x, b.y, e, provenance="finite-difference"), err


def douglas_fd(m: MetricSpec, x: Sequence[float], y: Sequence[float],
               berwald: tuple[TensorSample, np.ndarray] | None = None
               ) -> tuple[TensorSample, np.ndarray]:
    """Douglas tensor recomposed term by term from oracle ingredients; the
    mean-curvature fiber derivative is an outer difference of the
    Taylor-computed mean Berwald curvature."""
    n = m.dimension
    bpair = berwald if berwald is not None else berwald_fd(m, x, y)
    b, berr = bpair
    e_s, eerr = mean_berwald_fd(m, x, y, berwald=bpair)
    e = e_s.components
    h = outer_step(1, float(np.linalg.norm(y)))

    def mean_at(yv: np.ndarray) -> np.ndarray:
        return mean_berwald(m, x, yv).components

    de = np.empty((n, n, n))
    deerr = np.empty((n, n, n))
    for l in range(n):
        val, errl = richardson_diff(mean_at, y, (l,), h)
        de[:, :, l] = val
        deerr[:, :, l] = errl
    d = _douglas_from_parts(b.components, e, de, y)
    yabs = np.abs(np.asarray(y, dtype=float))
    eye = np.eye(n)
    err = berr + (2.0 / (n + 1)) * (
        np.einsum("jk,il->ijkl", eerr, eye)
        + np.einsum("jl,ik->ijkl", eerr, eye)
        + np.einsum("kl,ij->ijkl", eerr, eye)
        + np.einsum("jkl,i->ijkl", deerr, yabs))
    px, py = _pt(x, y)
    return TensorSample((1, 3), px, py, d, provenance="finite-difference"), err


def christoffel_spray(m: MetricSpec, x: Sequence[float], y: Sequence[float]
                      ) -> np.ndarray:
    """Spray of a fiberwise-quadratic metric from Christoffel symbols.

    Reads the coefficient matrix a_ij(x) off the fundamental tensor,
    differentiates it in x by Richardson central differences, and forms
    (1/2) Gamma^i_jk y^j y^k.  Refuses metrics whose fundamental tensor
    actually depends on the fiber direction.
    """
    n = m.dimension
    a = fundamental_tensor(m, x, y).components
    yarr = np.asarray(y, dtype=float)
    # direction-independence guard
    alt = yarr + 0.37 * np.roll(yarr, 1) + 0.11
    a_alt = fundamental_tensor(m, x, alt).components
    scale = max(1.0, float(np.max(np.abs(a))))
    if float(np.max(np.abs(a - a_alt))) > 1e-8 * scale:
        raise OracleFailureError(
            f"metric {m.label!r} is not fiberwise quadratic; the "
            "Christoffel oracle does not apply")
    h = outer_step(1, float(np.linalg.norm(x)))

    def a_at(xv: np.ndarray) -> np.ndarray:
        return fundamental_tensor(m, xv, y).components

    da = np.empty((n, n, n))     # da[l, j, k] = d a_lj / d x^k
    for k in range(n):
        val, _ = richardson_diff(a_at, x, (k,), h)
        da[:, :, k] = val
    ainv = np.linalg.inv(a)
    # da[l,j,k] + da[l,k,j] - da[j,k,l], contracted against a^il
    gamma = 0.5 * np.einsum(
        "il,ljk->ijk",
        ainv,
        da + np.transpose(da, (0, 2, 1)) - np.transpose(da, (2, 0, 1)))
    return 0.5 * np.einsum("ijk,j,k->i", gamma, yarr, yarr)
