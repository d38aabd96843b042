"""Truncated multivariate Taylor arithmetic (the derivative engine).

A :class:`Series` stores the Taylor coefficients of a scalar around an
evaluation point with respect to base-coordinate perturbations dx^i
(total degree at most 1) and fiber perturbations dy^i (total degree at
most ``y_order``).  Sums, products, quotients, and compositions with
smooth univariate functions are closed operations on this algebra, so
propagating seeds through an expression tree yields every requested
mixed partial to machine precision, with no step-size error.

The fiber part of a value is a dense polynomial over the graded monomial
basis; products are truncated convolutions driven by index tables built
once per (n_x, n_y, x_order, y_order) signature.  The non-constant part
of any value is nilpotent (degree caps), so a univariate composition is
an exact finite Horner evaluation.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

__all__ = ["TaylorContext", "Series", "get_context"]


def _monomials(n_vars: int, order: int) -> list[tuple[int, ...]]:
    """Exponent tuples of total degree <= order, graded lexicographic."""
    monos = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(n_vars), deg):
            e = [0] * n_vars
            for v in combo:
                e[v] += 1
            monos.append(tuple(e))
    return monos


class TaylorContext:
    """Shared tables for one algebra signature; values refer back to it."""

    def __init__(self, n_x: int, n_y: int, x_order: int, y_order: int):
        if x_order not in (0, 1):
            raise ValueError("x_order must be 0 or 1")
        if y_order < 0:
            raise ValueError("y_order must be nonnegative")
        self.n_x = n_x
        self.n_y = n_y
        self.x_order = x_order
        self.y_order = y_order
        self.n_slices = 1 + (n_x if x_order == 1 else 0)
        self.monomials = _monomials(n_y, y_order)
        self.m_index = {m: i for i, m in enumerate(self.monomials)}
        self.n_monos = len(self.monomials)
        degs = np.array([sum(m) for m in self.monomials])
        self.degrees = degs
        # beta! for each monomial (converts Taylor coefficients to partials)
        self.factorials = np.array(
            [math.prod(math.factorial(e) for e in m) for m in self.monomials],
            dtype=float)
        ip, iq, ir = [], [], []
        for p, mp in enumerate(self.monomials):
            dp = degs[p]
            for q, mq in enumerate(self.monomials):
                if dp + degs[q] > y_order:
                    continue
                ip.append(p)
                iq.append(q)
                ir.append(self.m_index[tuple(a + b for a, b in zip(mp, mq))])
        self._ip = np.array(ip, dtype=np.intp)
        self._iq = np.array(iq, dtype=np.intp)
        self._ir = np.array(ir, dtype=np.intp)
        # nilpotency bound: any product of more than this many non-constant
        # factors is truncated away
        self.max_power = x_order + y_order

    # -- constructors -------------------------------------------------------

    def zeros(self) -> "Series":
        return Series(self, np.zeros((self.n_slices, self.n_monos)))

    def constant(self, v: float) -> "Series":
        c = np.zeros((self.n_slices, self.n_monos))
        c[0, 0] = v
        return Series(self, c)

    def base_variable(self, i: int, value: float) -> "Series":
        """Seed x^i = value + dx^i."""
        c = np.zeros((self.n_slices, self.n_monos))
        c[0, 0] = value
        if self.x_order == 1:
            c[1 + i, 0] = 1.0
        return Series(self, c)

    def fiber_variable(self, i: int, value: float) -> "Series":
        """Seed y^i = value + dy^i."""
        c = np.zeros((self.n_slices, self.n_monos))
        c[0, 0] = value
        if self.y_order >= 1:
            unit = tuple(1 if j == i else 0 for j in range(self.n_y))
            c[0, self.m_index[unit]] = 1.0
        return Series(self, c)

    # -- coefficient access --------------------------------------------------

    def mono_id(self, beta) -> int:
        return self.m_index[tuple(beta)]


@lru_cache(maxsize=None)
def get_context(n_x: int, n_y: int, x_order: int, y_order: int) -> TaylorContext:
    return TaylorContext(n_x, n_y, x_order, y_order)


class Series:
    """One element of a truncated Taylor algebra."""

    __slots__ = ("ctx", "c")

    def __init__(self, ctx: TaylorContext, coeffs: np.ndarray):
        self.ctx = ctx
        self.c = coeffs

    @property
    def value(self) -> float:
        """Constant term, i.e. the plain evaluation."""
        return float(self.c[0, 0])

    def copy(self) -> "Series":
        return Series(self.ctx, self.c.copy())

    # -- ring operations ------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Series):
            return Series(self.ctx, self.c + other.c)
        out = self.c.copy()
        out[0, 0] += other
        return Series(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return Series(self.ctx, -self.c)

    def __sub__(self, other):
        if isinstance(other, Series):
            return Series(self.ctx, self.c - other.c)
        out = self.c.copy()
        out[0, 0] -= other
        return Series(self.ctx, out)

    def __rsub__(self, other):
        out = -self.c
        out[0, 0] += other
        return Series(self.ctx, out)

    def __mul__(self, other):
        if not isinstance(other, Series):
            return Series(self.ctx, self.c * other)
        ctx = self.ctx
        a, b = self.c, other.c
        ip, iq, ir, m = ctx._ip, ctx._iq, ctx._ir, ctx.n_monos
        out = np.empty_like(a)
        out[0] = np.bincount(ir, weights=a[0, ip] * b[0, iq], minlength=m)
        for s in range(1, ctx.n_slices):
            out[s] = np.bincount(
                ir, weights=a[0, ip] * b[s, iq] + a[s, ip] * b[0, iq], minlength=m)
        return Series(ctx, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.reciprocal()
        return Series(self.ctx, self.c / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    # -- composition ----------------------------------------------------------

    def nonconstant(self) -> "Series":
        out = self.c.copy()
        out[0, 0] = 0.0
        return Series(self.ctx, out)

    def compose(self, coeffs) -> "Series":
        """Evaluate sum_k coeffs[k] * (self - self.value)^k by Horner.

        ``coeffs`` are the univariate Taylor coefficients f^(k)(a0)/k! of
        some smooth f around the constant term a0; the result is the
        series of f(self).  Exact because the non-constant part is
        nilpotent.
        """
        u = self.nonconstant()
        res = self.ctx.constant(coeffs[-1])
        for k in range(len(coeffs) - 2, -1, -1):
            res = res * u + coeffs[k]
        return res

    def integer_power(self, n: int) -> "Series":
        if n < 0:
            return self.reciprocal().integer_power(-n)
        result = self.ctx.constant(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def reciprocal(self) -> "Series":
        a0 = self.value
        k = self.ctx.max_power
        coeffs = [(-1.0) ** j / a0 ** (j + 1) for j in range(k + 1)]
        return self.compose(coeffs)

    # -- coefficient extraction -------------------------------------------------

    def partial(self, x_slot: int, beta) -> float:
        """Plain mixed partial; x_slot 0 means no base derivative, 1+i means
        one derivative in x^i; ``beta`` is the fiber exponent tuple."""
        j = self.ctx.mono_id(beta)
        return float(self.c[x_slot, j] * self.ctx.factorials[j])


# univariate Taylor coefficient builders, f^(k)(a0)/k! for k = 0..kmax


def exp_coeffs(a0: float, kmax: int) -> list[float]:
    e = math.exp(a0)
    out = [e]
    for k in range(1, kmax + 1):
        out.append(out[-1] / k)
    return out


def log_coeffs(a0: float, kmax: int) -> list[float]:
    out = [math.log(a0)]
    for k in range(1, kmax + 1):
        out.append((-1.0) ** (k + 1) / (k * a0 ** k))
    return out


def power_coeffs(a0: float, r: float, kmax: int) -> list[float]:
    # binom(r, k) * a0^(r-k)
    out = [a0 ** r]
    coef = 1.0
    for k in range(1, kmax + 1):
        coef *= (r - (k - 1)) / k
        out.append(coef * a0 ** (r - k))
    return out


def sin_coeffs(a0: float, kmax: int) -> list[float]:
    s, c = math.sin(a0), math.cos(a0)
    cycle = [s, c, -s, -c]
    return [cycle[k % 4] / math.factorial(k) for k in range(kmax + 1)]


def cos_coeffs(a0: float, kmax: int) -> list[float]:
    s, c = math.sin(a0), math.cos(a0)
    cycle = [c, -s, -c, s]
    return [cycle[k % 4] / math.factorial(k) for k in range(kmax + 1)]
