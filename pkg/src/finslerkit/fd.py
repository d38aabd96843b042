"""Finite-difference oracle: central differences with Richardson
extrapolation and an honest error estimate.

This is the independent cross-check for the Taylor engine.  A mixed
partial of total order k is an iterated central difference (a signed sum
over the 2^k shift pattern), computed at steps h and h/2 and
extrapolated; the reported error combines the extrapolation defect with
a round-off bound, since high-order differences at small steps are
dominated by cancellation noise.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import OracleFailureError
from .expressions import Expr, evaluate

__all__ = ["FdResult", "fd_derivative", "richardson_diff", "agreement_gap"]

_EPS = float(np.finfo(float).eps)
FD_TOTAL_ORDER_CAP = 5


class FdResult(NamedTuple):
    value: float
    error: float


def _default_step(x: Sequence[float], y: Sequence[float]) -> float:
    norm = math.sqrt(sum(v * v for v in x) + sum(v * v for v in y))
    return 1e-3 * max(1.0, norm)


def _central(expr: Expr, x: Sequence[float], y: Sequence[float],
             vars_: list[tuple[str, int]], h: float) -> tuple[float, float]:
    """k-fold central difference; returns (estimate, max |f| seen)."""
    k = len(vars_)
    total = 0.0
    fmax = 0.0
    for signs in itertools.product((1.0, -1.0), repeat=k):
        xs = list(map(float, x))
        ys = list(map(float, y))
        sign = 1.0
        for (kind, idx), s in zip(vars_, signs):
            if kind == "x":
                xs[idx] += s * h
            else:
                ys[idx] += s * h
            sign *= s
        f = evaluate(expr, xs, ys)
        fmax = max(fmax, abs(f))
        total += sign * f
    return total / (2.0 * h) ** k, fmax


def fd_derivative(expr: Expr, x: Sequence[float], y: Sequence[float],
                  x_idx: Sequence[int] = (), y_idx: Sequence[int] = (),
                  h0: float | None = None) -> FdResult:
    """Mixed partial d^|x_idx|/dx d^|y_idx|/dy of ``expr`` at (x, y).

    Central differences at steps h and h/2 with one Richardson step; the
    error field bounds truncation plus round-off amplification.  Total
    order is capped at 5.
    """
    vars_ = [("x", i) for i in x_idx] + [("y", i) for i in y_idx]
    k = len(vars_)
    if k == 0:
        v = evaluate(expr, x, y)
        return FdResult(v, abs(v) * _EPS)
    if k > FD_TOTAL_ORDER_CAP:
        raise ValueError(f"total derivative order {k} exceeds cap {FD_TOTAL_ORDER_CAP}")
    h = h0 if h0 is not None else _default_step(x, y)
    d_h, fmax1 = _central(expr, x, y, vars_, h)
    d_h2, fmax2 = _central(expr, x, y, vars_, h / 2.0)
    fmax = max(fmax1, fmax2, 1e-300)
    value = (4.0 * d_h2 - d_h) / 3.0
    if not math.isfinite(value):
        raise OracleFailureError(
            f"non-finite central difference for order-{k} derivative at step {h}")
    # D(h/2) divides a ~2^k-term alternating sum by (2*(h/2))^k = h^k
    roundoff = 2.0 ** k * _EPS * fmax / h ** k
    error = abs(d_h2 - d_h) / 3.0 + roundoff
    return FdResult(value, error)


def richardson_diff(fn: Callable[[np.ndarray], np.ndarray], point: Sequence[float],
                    idx: Sequence[int], h: float) -> tuple[np.ndarray, np.ndarray]:
    """Richardson-extrapolated mixed central difference of an array-valued
    function of one vector argument; differentiates w.r.t. point[i] for i
    in ``idx`` (repeats allowed).  Returns (value, error) arrays."""
    k = len(idx)
    base = np.asarray(point, dtype=float)

    def central(step: float) -> tuple[np.ndarray, float]:
        total = None
        fmax = 0.0
        for signs in itertools.product((1.0, -1.0), repeat=k):
            p = base.copy()
            sign = 1.0
            for i, s in zip(idx, signs):
                p[i] += s * step
                sign *= s
            f = np.asarray(fn(p), dtype=float)
            fmax = max(fmax, float(np.max(np.abs(f))) if f.size else 0.0)
            total = sign * f if total is None else total + sign * f
        return total / (2.0 * step) ** k, fmax

    d_h, fmax1 = central(h)
    d_h2, fmax2 = central(h / 2.0)
    fmax = max(fmax1, fmax2, 1e-300)
    value = (4.0 * d_h2 - d_h) / 3.0
    if not np.all(np.isfinite(value)):
        raise OracleFailureError(
            f"non-finite order-{k} central difference at step {h}")
    roundoff = 2.0 ** k * _EPS * fmax / h ** k
    error = np.abs(d_h2 - d_h) / 3.0 + roundoff
    return value, error


def outer_step(order: int, scale: float = 1.0) -> float:
    """Step size balancing truncation and round-off for an order-``order``
    Richardson central difference of a smooth O(1) function."""
    return _EPS ** (1.0 / (order + 4)) * max(1.0, scale)


def agreement_gap(a: np.ndarray, b: np.ndarray, fd_error: np.ndarray,
                  rel_floor: float = 1e-6, error_factor: float = 10.0) -> float:
    """Worst ratio |a - b| / allowed over components, where the allowance
    is max(error_factor * fd_error, rel_floor * scale) and the scale is
    the largest magnitude in either tensor (at least 1).  A result <= 1
    means the two engines agree."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0,
                float(np.max(np.abs(b))) if b.size else 0.0)
    allowed = np.maximum(error_factor * np.asarray(fd_error, dtype=float),
                         rel_floor * scale)
    gaps = np.abs(a - b) / allowed
    return float(np.max(gaps)) if gaps.size else 0.0
