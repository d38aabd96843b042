"""Closed-form scalar expressions over chart coordinates.

An expression tree encodes a scalar such as F^2(x, y), a warping function
f(x), or a PDE coefficient c(x) as nested immutable nodes over base
coordinates x^i and fiber coordinates y^i.  Nodes with restricted domains
(sqrt, log, quotients, non-integer powers) check their validity predicate
at every evaluation point and raise ``EvaluationDomainError`` on
violation; this is how the zero section and other non-smooth loci are
kept out of every computation.

Trees serialize to JSON as ``{"op": <kind>, ...}`` documents with 1-based
coordinate indices; in-memory indices are 0-based.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EvaluationDomainError, SchemaError

__all__ = [
    "Expr", "const", "xvar", "yvar", "add", "mul", "quotient", "power",
    "sqrt", "exp", "log", "sin", "cos", "evaluate", "evaluate_batch",
    "coordinate_extent", "shift_indices", "expr_to_dict", "expr_from_dict",
    "dumps", "loads",
]

# kinds with a fixed child count
_UNARY_KINDS = ("exp", "sqrt")
_NAMED_UNIVARIATE = ("sin", "cos", "log")


@dataclass(frozen=True)
class Expr:
    """One node of an expression tree.  Use the module factories to build."""

    kind: str
    children: tuple["Expr", ...] = ()
    value: float | None = None      # constants
    index: int | None = None        # coordinates (0-based)
    exponent: float | None = None   # power nodes

    def __add__(self, other):
        return add(self, _as_expr(other))

    def __radd__(self, other):
        return add(_as_expr(other), self)

    def __sub__(self, other):
        return add(self, mul(const(-1.0), _as_expr(other)))

    def __rsub__(self, other):
        return add(_as_expr(other), mul(const(-1.0), self))

    def __mul__(self, other):
        return mul(self, _as_expr(other))

    def __rmul__(self, other):
        return mul(_as_expr(other), self)

    def __truediv__(self, other):
        return quotient(self, _as_expr(other))

    def __rtruediv__(self, other):
        return quotient(_as_expr(other), self)

    def __pow__(self, r):
        return power(self, r)

    def __neg__(self):
        return mul(const(-1.0), self)

    def describe(self) -> str:
        """Short node label used in error messages."""
        if self.kind == "const":
            return f"const({self.value})"
        if self.kind in ("x", "y"):
            return f"{self.kind}^{self.index + 1}"
        if self.kind == "power":
            return f"power(exponent={self.exponent})"
        return self.kind


def _as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, float)):
        return const(float(v))
    raise TypeError(f"cannot coerce {type(v).__name__} to an expression")


def const(v: float) -> Expr:
    return Expr("const", value=float(v))


def xvar(i: int) -> Expr:
    """Base coordinate x^(i+1); ``i`` is 0-based."""
    if i < 0:
        raise ValueError("coordinate index must be nonnegative")
    return Expr("x", index=i)


def yvar(i: int) -> Expr:
    """Fiber coordinate y^(i+1); ``i`` is 0-based."""
    if i < 0:
        raise ValueError("coordinate index must be nonnegative")
    return Expr("y", index=i)


def add(*terms) -> Expr:
    terms = tuple(_as_expr(t) for t in terms)
    if not terms:
        raise ValueError("sum needs at least one term")
    if len(terms) == 1:
        return terms[0]
    return Expr("sum", children=terms)


def mul(*factors) -> Expr:
    factors = tuple(_as_expr(f) for f in factors)
    if not factors:
        raise ValueError("product needs at least one factor")
    if len(factors) == 1:
        return factors[0]
    return Expr("product", children=factors)


def quotient(num, den) -> Expr:
    return Expr("quotient", children=(_as_expr(num), _as_expr(den)))


def power(base, r: float) -> Expr:
    return Expr("power", children=(_as_expr(base),), exponent=float(r))


def sqrt(arg) -> Expr:
    return Expr("sqrt", children=(_as_expr(arg),))


def exp(arg) -> Expr:
    return Expr("exp", children=(_as_expr(arg),))


def log(arg) -> Expr:
    return Expr("log", children=(_as_expr(arg),))


def sin(arg) -> Expr:
    return Expr("sin", children=(_as_expr(arg),))


def cos(arg) -> Expr:
    return Expr("cos", children=(_as_expr(arg),))


# ---------------------------------------------------------------------------
# evaluation


def _is_integer(r: float) -> bool:
    return float(r).is_integer()


def evaluate(expr: Expr, x: Sequence[float], y: Sequence[float] = ()) -> float:
    """Evaluate the expression at one point, enforcing validity predicates."""
    k = expr.kind
    if k == "const":
        return expr.value
    if k == "x":
        return float(x[expr.index])
    if k == "y":
        return float(y[expr.index])
    if k == "sum":
        return sum(evaluate(c, x, y) for c in expr.children)
    if k == "product":
        out = 1.0
        for c in expr.children:
            out *= evaluate(c, x, y)
        return out
    if k == "quotient":
        num = evaluate(expr.children[0], x, y)
        den = evaluate(expr.children[1], x, y)
        if den == 0.0:
            raise EvaluationDomainError(
                "quotient denominator vanished", node=expr, point=(tuple(x), tuple(y)))
        return num / den
    if k == "power":
        base = evaluate(expr.children[0], x, y)
        r = expr.exponent
        if _is_integer(r):
            if r < 0 and base == 0.0:
                raise EvaluationDomainError(
                    "negative power of zero", node=expr, point=(tuple(x), tuple(y)))
            return base ** int(r)
        if base <= 0.0:
            raise EvaluationDomainError(
                f"power with exponent {r} needs a strictly positive argument",
                node=expr, point=(tuple(x), tuple(y)))
        return base ** r
    if k == "sqrt":
        arg = evaluate(expr.children[0], x, y)
        if arg <= 0.0:
            raise EvaluationDomainError(
                "sqrt needs a strictly positive argument",
                node=expr, point=(tuple(x), tuple(y)))
        return math.sqrt(arg)
    if k == "exp":
        return math.exp(evaluate(expr.children[0], x, y))
    if k == "log":
        arg = evaluate(expr.children[0], x, y)
        if arg <= 0.0:
            raise EvaluationDomainError(
                "log needs a strictly positive argument",
                node=expr, point=(tuple(x), tuple(y)))
        return math.log(arg)
    if k == "sin":
        return math.sin(evaluate(expr.children[0], x, y))
    if k == "cos":
        return math.cos(evaluate(expr.children[0], x, y))
    raise SchemaError(f"unknown expression kind {k!r}")


def evaluate_batch(expr: Expr, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over rows of ``x`` (m, n_x) and ``y`` (m, n_y)."""
    k = expr.kind
    if k == "const":
        return np.full(x.shape[0], expr.value)
    if k == "x":
        return np.asarray(x[:, expr.index], dtype=float)
    if k == "y":
        return np.asarray(y[:, expr.index], dtype=float)
    if k == "sum":
        out = evaluate_batch(expr.children[0], x, y)
        for c in expr.children[1:]:
            out = out + evaluate_batch(c, x, y)
        return out
    if k == "product":
        out = evaluate_batch(expr.children[0], x, y)
        for c in expr.children[1:]:
            out = out * evaluate_batch(c, x, y)
        return out
    if k == "quotient":
        num = evaluate_batch(expr.children[0], x, y)
        den = evaluate_batch(expr.children[1], x, y)
        if np.any(den == 0.0):
            i = int(np.argmax(den == 0.0))
            raise EvaluationDomainError(
                "quotient denominator vanished",
                node=expr, point=(tuple(x[i]), tuple(y[i])))
        return num / den
    if k == "power":
        base = evaluate_batch(expr.children[0], x, y)
        r = expr.exponent
        if _is_integer(r):
            if r < 0 and np.any(base == 0.0):
                i = int(np.argmax(base == 0.0))
                raise EvaluationDomainError(
                    "negative power of zero",
                    node=expr, point=(tuple(x[i]), tuple(y[i])))
            return base ** int(r)
        if np.any(base <= 0.0):
            i = int(np.argmax(base <= 0.0))
            raise EvaluationDomainError(
                f"power with exponent {r} needs a strictly positive argument",
                node=expr, point=(tuple(x[i]), tuple(y[i])))
        return base ** r
    if k == "sqrt":
        arg = evaluate_batch(expr.children[0], x, y)
        if np.any(arg <= 0.0):
            i = int(np.argmax(arg <= 0.0))
            raise EvaluationDomainError(
                "sqrt needs a strictly positive argument",
                node=expr, point=(tuple(x[i]), tuple(y[i])))
        return np.sqrt(arg)
    if k == "exp":
        return np.exp(evaluate_batch(expr.children[0], x, y))
    if k == "log":
        arg = evaluate_batch(expr.children[0], x, y)
        if np.any(arg <= 0.0):
            i = int(np.argmax(arg <= 0.0))
            raise EvaluationDomainError(
                "log needs a strictly positive argument",
                node=expr, point=(tuple(x[i]), tuple(y[i])))
        return np.log(arg)
    if k == "sin":
        return np.sin(evaluate_batch(expr.children[0], x, y))
    if k == "cos":
        return np.cos(evaluate_batch(expr.children[0], x, y))
    raise SchemaError(f"unknown expression kind {k!r}")


# ---------------------------------------------------------------------------
# structure utilities


def coordinate_extent(expr: Expr) -> tuple[int, int]:
    """Smallest (n_x, n_y) for which all coordinate indices are in range."""
    nx = ny = 0
    stack = [expr]
    while stack:
        e = stack.pop()
        if e.kind == "x":
            nx = max(nx, e.index + 1)
        elif e.kind == "y":
            ny = max(ny, e.index + 1)
        stack.extend(e.children)
    return nx, ny


def shift_indices(expr: Expr, x_offset: int, y_offset: int) -> Expr:
    """Re-index coordinates, used when embedding a factor in a product chart."""
    if expr.kind == "x":
        return Expr("x", index=expr.index + x_offset)
    if expr.kind == "y":
        return Expr("y", index=expr.index + y_offset)
    if not expr.children:
        return expr
    return Expr(expr.kind,
                children=tuple(shift_indices(c, x_offset, y_offset) for c in expr.children),
                value=expr.value, index=expr.index, exponent=expr.exponent)


def depends_on_fiber(expr: Expr) -> bool:
    _, ny = coordinate_extent(expr)
    return ny > 0


def depends_on_base(expr: Expr) -> bool:
    nx, _ = coordinate_extent(expr)
    return nx > 0


# ---------------------------------------------------------------------------
# JSON serialization  (coordinate indices are 1-based on the wire)


def expr_to_dict(expr: Expr) -> dict:
    k = expr.kind
    if k == "const":
        return {"op": "const", "value": expr.value}
    if k in ("x", "y"):
        return {"op": k, "i": expr.index + 1}
    if k in ("sum", "product", "quotient") + _UNARY_KINDS + _NAMED_UNIVARIATE:
        return {"op": k, "args": [expr_to_dict(c) for c in expr.children]}
    if k == "power":
        return {"op": "power", "exponent": expr.exponent,
                "args": [expr_to_dict(expr.children[0])]}
    raise SchemaError(f"unknown expression kind {k!r}")


def _require_keys(doc: dict, required: set[str], where: str) -> None:
    keys = set(doc)
    if keys != required:
        extra = keys - required
        missing = required - keys
        parts = []
        if missing:
            parts.append(f"missing {sorted(missing)}")
        if extra:
            parts.append(f"unknown {sorted(extra)}")
        raise SchemaError(f"bad expression document at {where}: " + ", ".join(parts))


def expr_from_dict(doc, where: str = "$") -> Expr:
    if not isinstance(doc, dict):
        raise SchemaError(f"expression at {where} must be an object")
    op = doc.get("op")
    if op == "const":
        _require_keys(doc, {"op", "value"}, where)
        if not isinstance(doc["value"], (int, float)) or isinstance(doc["value"], bool):
            raise SchemaError(f"const value at {where} must be a number")
        return const(float(doc["value"]))
    if op in ("x", "y"):
        _require_keys(doc, {"op", "i"}, where)
        i = doc["i"]
        if not isinstance(i, int) or isinstance(i, bool) or i < 1:
            raise SchemaError(f"coordinate index at {where} must be a 1-based integer")
        return Expr(op, index=i - 1)
    if op in ("sum", "product"):
        _require_keys(doc, {"op", "args"}, where)
        args = doc["args"]
        if not isinstance(args, list) or len(args) < 1:
            raise SchemaError(f"{op} at {where} needs a nonempty args list")
        return Expr(op, children=tuple(
            expr_from_dict(a, f"{where}.args[{j}]") for j, a in enumerate(args)))
    if op == "quotient":
        _require_keys(doc, {"op", "args"}, where)
        args = doc["args"]
        if not isinstance(args, list) or len(args) != 2:
            raise SchemaError(f"quotient at {where} needs exactly 2 args")
        return Expr(op, children=tuple(
            expr_from_dict(a, f"{where}.args[{j}]") for j, a in enumerate(args)))
    if op == "power":
        _require_keys(doc, {"op", "args", "exponent"}, where)
        if not isinstance(doc["exponent"], (int, float)) or isinstance(doc["exponent"], bool):
            raise SchemaError(f"power exponent at {where} must be a number")
        args = doc["args"]
        if not isinstance(args, list) or len(args) != 1:
            raise SchemaError(f"power at {where} needs exactly 1 arg")
        return power(expr_from_dict(args[0], f"{where}.args[0]"), float(doc["exponent"]))
    if op in _UNARY_KINDS + _NAMED_UNIVARIATE:
        _require_keys(doc, {"op", "args"}, where)
        args = doc["args"]
        if not isinstance(args, list) or len(args) != 1:
            raise SchemaError(f"{op} at {where} needs exactly 1 arg")
        return Expr(op, children=(expr_from_dict(args[0], f"{where}.args[0]"),))
    raise SchemaError(f"unknown op {op!r} at {where}")


def dumps(expr: Expr) -> str:
    return json.dumps(expr_to_dict(expr), sort_keys=True)


def loads(text: str) -> Expr:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from e
    return expr_from_dict(doc)
