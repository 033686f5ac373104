"""Truncated multivariate Taylor (jet) arithmetic.

A jet stores the Taylor coefficients of a scalar function at a point, up to
a fixed total degree.  Coefficients are indexed by multi-index in graded
lexicographic order (degree first, then lexicographic within a degree), so
that coefficient layouts are byte-stable across runs.  The stored numbers
are Taylor *coefficients*, i.e. partial derivatives divided by the
multi-index factorial.

All jets are immutable after construction and all operations are pure, so
concurrent use is safe.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import JetDomainError, JetError

# Margin around tan poles; inner values closer than this to pi/2 + k*pi
# are rejected to avoid catastrophic cancellation.
TAN_POLE_MARGIN = 1e-3


def _multi_indices(dim: int, order: int) -> list[tuple[int, ...]]:
    """All multi-indices of length `dim` with total degree <= `order`,
    in graded lexicographic order."""
    out: list[tuple[int, ...]] = []

    def tuples_of_degree(deg, length):
        if length == 1:
            yield (deg,)
            return
        for first in range(deg + 1):
            for rest in tuples_of_degree(deg - first, length - 1):
                yield (first,) + rest

    for deg in range(order + 1):
        out.extend(sorted(tuples_of_degree(deg, dim)))
    return out


@lru_cache(maxsize=None)
def _space(dim: int, order: int):
    """Index space for (dim, order): multi-index list, position lookup and
    the sparse multiplication table (ia, ib, ic) with deg(ia)+deg(ib) <= order."""
    idxs = _multi_indices(dim, order)
    pos = {m: p for p, m in enumerate(idxs)}
    degs = [sum(m) for m in idxs]
    ia, ib, ic = [], [], []
    for pa, ma in enumerate(idxs):
        for pb, mb in enumerate(idxs):
            if degs[pa] + degs[pb] > order:
                continue
            mc = tuple(x + y for x, y in zip(ma, mb))
            ia.append(pa)
            ib.append(pb)
            ic.append(pos[mc])
    return idxs, pos, (np.array(ia), np.array(ib), np.array(ic))


def n_coeffs(dim: int, order: int) -> int:
    return math.comb(dim + order, order)


class Jet:
    """Truncated Taylor expansion of a scalar function at a point."""

    __slots__ = ("dim", "order", "coeffs")

    def __init__(self, dim: int, order: int, coeffs):
        if dim < 1:
            raise JetError(f"jet dim must be >= 1, got {dim}")
        if order < 0:
            raise JetError(f"jet order must be >= 0, got {order}")
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (n_coeffs(dim, order),):
            raise JetError(
                f"expected {n_coeffs(dim, order)} coefficients for "
                f"dim={dim}, order={order}, got shape {coeffs.shape}"
            )
        coeffs.flags.writeable = False
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    # -- construction ------------------------------------------------------

    @staticmethod
    def constant(value: float, dim: int, order: int) -> "Jet":
        c = np.zeros(n_coeffs(dim, order))
        c[0] = value
        return Jet(dim, order, c)

    @staticmethod
    def variable(index: int, value: float, dim: int, order: int) -> "Jet":
        """Jet of the coordinate function x_index at the given value."""
        if not 0 <= index < dim:
            raise JetError(f"coordinate index {index} out of range for dim {dim}")
        c = np.zeros(n_coeffs(dim, order))
        c[0] = value
        if order >= 1:
            idxs, pos, _ = _space(dim, order)
            unit = tuple(1 if i == index else 0 for i in range(dim))
            c[pos[unit]] = 1.0
        return Jet(dim, order, c)

    # -- queries -----------------------------------------------------------

    def value(self) -> float:
        return float(self.coeffs[0])

    def partial(self, multi_index) -> float:
        """Partial derivative for the multi-index (coefficient times the
        multi-index factorial)."""
        multi_index = tuple(int(m) for m in multi_index)
        if len(multi_index) != self.dim or any(m < 0 for m in multi_index):
            raise JetError(f"bad multi-index {multi_index} for dim {self.dim}")
        if sum(multi_index) > self.order:
            raise JetError(
                f"multi-index {multi_index} exceeds jet order {self.order}"
            )
        _, pos, _ = _space(self.dim, self.order)
        fact = 1.0
        for m in multi_index:
            fact *= math.factorial(m)
        return float(self.coeffs[pos[multi_index]]) * fact

    def gradient(self) -> np.ndarray:
        """First-order partials as a flat array of length dim."""
        if self.order < 1:
            raise JetError("jet order 0 carries no first-order partials")
        _, pos, _ = _space(self.dim, self.order)
        out = np.empty(self.dim)
        for i in range(self.dim):
            unit = tuple(1 if j == i else 0 for j in range(self.dim))
            out[i] = self.coeffs[pos[unit]]
        return out

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetError(f"cannot extend order {self.order} jet to {order}")
        if order == self.order:
            return self
        return Jet(self.dim, order, self.coeffs[: n_coeffs(self.dim, order)])

    def derivative(self, index: int) -> "Jet":
        """Jet of the partial derivative with respect to x_index; the result
        has order reduced by one."""
        if not 0 <= index < self.dim:
            raise JetError(f"coordinate index {index} out of range")
        if self.order < 1:
            raise JetError("cannot differentiate an order-0 jet")
        idxs, pos, _ = _space(self.dim, self.order)
        _, newpos, _ = _space(self.dim, self.order - 1)
        c = np.zeros(n_coeffs(self.dim, self.order - 1))
        for p, m in enumerate(idxs):
            if m[index] == 0:
                continue
            lowered = tuple(
                x - 1 if j == index else x for j, x in enumerate(m)
            )
            if sum(lowered) > self.order - 1:
                continue
            c[newpos[lowered]] = self.coeffs[p] * m[index]
        return Jet(self.dim, self.order - 1, c)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.dim != self.dim or other.order != self.order:
                raise JetError(
                    f"cannot mix jets of (dim, order) "
                    f"({self.dim}, {self.order}) and ({other.dim}, {other.order})"
                )
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet.constant(float(other), self.dim, self.order)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return Jet(self.dim, self.order, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return Jet(self.dim, self.order, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return Jet(self.dim, self.order, other.coeffs - self.coeffs)

    def __neg__(self):
        return Jet(self.dim, self.order, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.dim, self.order, self.coeffs * float(other))
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        _, _, (ia, ib, ic) = _space(self.dim, self.order)
        out = np.zeros_like(self.coeffs)
        np.add.at(out, ic, self.coeffs[ia] * other.coeffs[ib])
        return Jet(self.dim, self.order, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            if float(other) == 0.0:
                raise JetDomainError("division by zero scalar")
            return Jet(self.dim, self.order, self.coeffs / float(other))
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        rec = self.reciprocal()
        return rec * other

    def reciprocal(self) -> "Jet":
        v = self.value()
        if v == 0.0:
            raise JetDomainError(
                "reciprocal of a jet with zero value part "
                "(expression singular at the sample point)"
            )
        # Taylor coefficients of 1/t at v.
        c = np.empty(self.order + 1)
        c[0] = 1.0 / v
        for m in range(1, self.order + 1):
            c[m] = -c[m - 1] / v
        return _horner(self, c)

    def __repr__(self):
        return f"Jet(dim={self.dim}, order={self.order}, value={self.value()!r})"


def _horner(a: Jet, outer: np.ndarray) -> Jet:
    """Evaluate the outer univariate Taylor polynomial (coefficients about
    a.value()) at the jet `a`; the shifted inner jet is nilpotent so the
    composition is exact at the truncation order."""
    shifted = a - a.value()
    result = Jet.constant(float(outer[-1]), a.dim, a.order)
    for m in range(len(outer) - 2, -1, -1):
        result = result * shifted + float(outer[m])
    return result


def _tan_coeffs(v: float, order: int) -> np.ndarray:
    # T(s) = tan(v + s) satisfies T' = 1 + T^2.
    a = np.zeros(order + 1)
    a[0] = math.tan(v)
    for m in range(order):
        conv = float(np.dot(a[: m + 1], a[m::-1]))
        a[m + 1] = ((1.0 if m == 0 else 0.0) + conv) / (m + 1)
    return a


def _arctanh_coeffs(v: float, order: int) -> np.ndarray:
    # A(s) = arctanh(v + s) satisfies A'(s) = 1 / (1 - (v+s)^2).
    a = np.zeros(order + 1)
    a[0] = math.atanh(v)
    if order == 0:
        return a
    # Reciprocal series of D(s) = (1 - v^2) - 2 v s - s^2.
    d = [1.0 - v * v, -2.0 * v, -1.0]
    b = np.zeros(order)
    b[0] = 1.0 / d[0]
    for m in range(1, order):
        acc = 0.0
        for j in (1, 2):
            if j <= m:
                acc += d[j] * b[m - j]
        b[m] = -acc / d[0]
    for m in range(order):
        a[m + 1] = b[m] / (m + 1)
    return a


def _pow_coeffs(v: float, p: float, order: int) -> np.ndarray:
    c = np.empty(order + 1)
    c[0] = v**p
    binom = 1.0
    for m in range(1, order + 1):
        binom *= (p - (m - 1)) / m
        c[m] = binom * v ** (p - m)
    return c


UNIVARIATE = (
    "exp",
    "log",
    "sin",
    "cos",
    "sinh",
    "cosh",
    "tan",
    "arctanh",
    "sqrt",
    "pow",
)


def compose(name: str, a: Jet, exponent: float | None = None) -> Jet:
    """Jet of f(a) for a supported univariate function f.

    `exponent` is required for name="pow" (real power of a positive base).
    Raises JetDomainError when a.value() is outside the domain of f.
    """
    v = a.value()
    K = a.order
    if name == "exp":
        e = math.exp(v)
        c = np.array([e / math.factorial(m) for m in range(K + 1)])
    elif name == "log":
        if v <= 0.0:
            raise JetDomainError(f"log of non-positive value {v}")
        c = np.empty(K + 1)
        c[0] = math.log(v)
        for m in range(1, K + 1):
            c[m] = (-1.0) ** (m - 1) / (m * v**m)
    elif name == "sin":
        cycle = [math.sin(v), math.cos(v), -math.sin(v), -math.cos(v)]
        c = np.array([cycle[m % 4] / math.factorial(m) for m in range(K + 1)])
    elif name == "cos":
        cycle = [math.cos(v), -math.sin(v), -math.cos(v), math.sin(v)]
        c = np.array([cycle[m % 4] / math.factorial(m) for m in range(K + 1)])
    elif name == "sinh":
        cycle = [math.sinh(v), math.cosh(v)]
        c = np.array([cycle[m % 2] / math.factorial(m) for m in range(K + 1)])
    elif name == "cosh":
        cycle = [math.cosh(v), math.sinh(v)]
        c = np.array([cycle[m % 2] / math.factorial(m) for m in range(K + 1)])
    elif name == "tan":
        u = (v - math.pi / 2.0) / math.pi
        if abs(u - round(u)) * math.pi < TAN_POLE_MARGIN:
            raise JetDomainError(f"tan evaluated within margin of a pole at {v}")
        c = _tan_coeffs(v, K)
    elif name == "arctanh":
        if not -1.0 < v < 1.0:
            raise JetDomainError(f"arctanh of value {v} outside (-1, 1)")
        c = _arctanh_coeffs(v, K)
    elif name == "sqrt":
        if v <= 0.0:
            raise JetDomainError(f"sqrt of non-positive value {v}")
        c = _pow_coeffs(v, 0.5, K)
    elif name == "pow":
        if exponent is None:
            raise JetError("pow composition requires an exponent")
        if v <= 0.0:
            raise JetDomainError(f"real power of non-positive base {v}")
        c = _pow_coeffs(v, float(exponent), K)
    else:
        raise JetError(f"unknown univariate function {name!r}")
    return _horner(a, c)


def int_power(a: Jet, p: int) -> Jet:
    """a**p for integer p, by repeated multiplication (exact in jet
    arithmetic, no positivity requirement for p >= 0)."""
    if p == 0:
        return Jet.constant(1.0, a.dim, a.order)
    if p < 0:
        return int_power(a.reciprocal(), -p)
    result = a
    for _ in range(p - 1):
        result = result * a
    return result
