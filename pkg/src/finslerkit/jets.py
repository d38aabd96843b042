"""Jet evaluation: all mixed partials of an expression at a point, at once.

``jet_eval`` seeds base/fiber coordinates with perturbation variables and
pushes them through the expression tree using truncated Taylor
arithmetic; the resulting coefficients are exact derivatives (polynomial
inputs give bit-stable output).  The public caps are one derivative in x
and four in y, which covers every single-expression query in this
package; internal tensor code drives the same engine at higher fiber
order through :func:`taylor_eval`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import EvaluationDomainError, SchemaError
from .expressions import Expr, coordinate_extent
from .taylor import (Series, cos_coeffs, exp_coeffs, get_context, log_coeffs,
                     power_coeffs, sin_coeffs)

__all__ = ["Jet", "jet_eval", "taylor_eval", "X_ORDER_CAP", "Y_ORDER_CAP"]

X_ORDER_CAP = 1
Y_ORDER_CAP = 4


def _series_eval(expr: Expr, ctx, x: Sequence[float], y: Sequence[float]) -> Series:
    k = expr.kind
    if k == "const":
        return ctx.constant(expr.value)
    if k == "x":
        return ctx.base_variable(expr.index, float(x[expr.index]))
    if k == "y":
        return ctx.fiber_variable(expr.index, float(y[expr.index]))
    if k == "sum":
        out = _series_eval(expr.children[0], ctx, x, y)
        for c in expr.children[1:]:
            out = out + _series_eval(c, ctx, x, y)
        return out
    if k == "product":
        out = _series_eval(expr.children[0], ctx, x, y)
        for c in expr.children[1:]:
            out = out * _series_eval(c, ctx, x, y)
        return out
    if k == "quotient":
        num = _series_eval(expr.children[0], ctx, x, y)
        den = _series_eval(expr.children[1], ctx, x, y)
        if den.value == 0.0:
            raise EvaluationDomainError(
                "quotient denominator vanished", node=expr,
                point=(tuple(x), tuple(y)))
        return num / den
    if k == "power":
        base = _series_eval(expr.children[0], ctx, x, y)
        r = expr.exponent
        if float(r).is_integer():
            n = int(r)
            if n < 0 and base.value == 0.0:
                raise EvaluationDomainError(
                    "negative power of zero", node=expr,
                    point=(tuple(x), tuple(y)))
            return base.integer_power(n)
        if base.value <= 0.0:
            raise EvaluationDomainError(
                f"power with exponent {r} needs a strictly positive argument",
                node=expr, point=(tuple(x), tuple(y)))
        return base.compose(power_coeffs(base.value, r, ctx.max_power))
    if k == "sqrt":
        arg = _series_eval(expr.children[0], ctx, x, y)
        if arg.value <= 0.0:
            raise EvaluationDomainError(
                "sqrt needs a strictly positive argument", node=expr,
                point=(tuple(x), tuple(y)))
        return arg.compose(power_coeffs(arg.value, 0.5, ctx.max_power))
    if k == "exp":
        arg = _series_eval(expr.children[0], ctx, x, y)
        return arg.compose(exp_coeffs(arg.value, ctx.max_power))
    if k == "log":
        arg = _series_eval(expr.children[0], ctx, x, y)
        if arg.value <= 0.0:
            raise EvaluationDomainError(
                "log needs a strictly positive argument", node=expr,
                point=(tuple(x), tuple(y)))
        return arg.compose(log_coeffs(arg.value, ctx.max_power))
    if k == "sin":
        arg = _series_eval(expr.children[0], ctx, x, y)
        return arg.compose(sin_coeffs(arg.value, ctx.max_power))
    if k == "cos":
        arg = _series_eval(expr.children[0], ctx, x, y)
        return arg.compose(cos_coeffs(arg.value, ctx.max_power))
    raise SchemaError(f"unknown expression kind {k!r}")


def taylor_eval(expr: Expr, x: Sequence[float], y: Sequence[float],
                x_order: int, y_order: int) -> Series:
    """Series of the expression around (x, y); no order caps (internal)."""
    nx_needed, ny_needed = coordinate_extent(expr)
    if nx_needed > len(x) or ny_needed > len(y):
        raise EvaluationDomainError(
            f"expression uses coordinates beyond the point dimensions "
            f"(needs x^{nx_needed}, y^{ny_needed}; got {len(x)}, {len(y)})",
            node=expr, point=(tuple(x), tuple(y)))
    ctx = get_context(len(x), len(y), x_order, y_order)
    return _series_eval(expr, ctx, x, y)


@dataclass(frozen=True)
class Jet:
    """Mixed partials of a scalar at a point.

    ``coefficients`` maps (x_indices, y_indices) index tuples (0-based,
    sorted, repeats allowed) to plain derivative values; the empty key
    pair holds the evaluation itself.
    """

    base_point: tuple[float, ...]
    fiber_point: tuple[float, ...]
    x_order: int
    y_order: int
    coefficients: dict

    @property
    def value(self) -> float:
        return self.coefficients[((), ())]

    def derivative(self, x_idx: Sequence[int] = (), y_idx: Sequence[int] = ()) -> float:
        """Partial w.r.t. the listed coordinates (order of listing is
        immaterial; mixed partials commute)."""
        key = (tuple(sorted(x_idx)), tuple(sorted(y_idx)))
        try:
            return self.coefficients[key]
        except KeyError:
            raise ValueError(
                f"derivative {key} not stored (orders are x<={self.x_order}, "
                f"y<={self.y_order})") from None


def _mono_to_indices(mono: tuple[int, ...]) -> tuple[int, ...]:
    out = []
    for v, e in enumerate(mono):
        out.extend([v] * e)
    return tuple(out)


def jet_eval(expr: Expr, x: Sequence[float], y: Sequence[float],
             x_order: int = 1, y_order: int = Y_ORDER_CAP) -> Jet:
    """All mixed partials of ``expr`` at (x, y) up to the given orders.

    Raises ``ValueError`` beyond the supported caps (x_order <= 1,
    y_order <= 4) and ``EvaluationDomainError`` outside the expression's
    validity domain.
    """
    if not (0 <= x_order <= X_ORDER_CAP):
        raise ValueError(f"x_order must be 0 or {X_ORDER_CAP}")
    if not (0 <= y_order <= Y_ORDER_CAP):
        raise ValueError(f"y_order must be between 0 and {Y_ORDER_CAP}")
    s = taylor_eval(expr, x, y, x_order, y_order)
    ctx = s.ctx
    coeffs: dict = {}
    for slot in range(ctx.n_slices):
        x_key = () if slot == 0 else (slot - 1,)
        for j, mono in enumerate(ctx.monomials):
            coeffs[(x_key, _mono_to_indices(mono))] = float(
                s.c[slot, j] * ctx.factorials[j])
    return Jet(tuple(float(v) for v in x), tuple(float(v) for v in y),
               x_order, y_order, coeffs)
