"""Charts, metric/density specifications and pointwise tensor machinery.

Metrics are given as symmetric matrices of parsed expressions over a chart;
evaluation produces jet-valued symmetric matrices.  Tensors at a point are
dense (dimension is at most 5 in practice), stored as numpy object arrays
of jets or plain float arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import exprdsl
from .errors import (
    DomainConstraintError,
    JetError,
    SignatureError,
    SingularMetricError,
    WefeError,
)
from .exprdsl import Expr
from .jets import Jet

# Margin applied to strict domain constraints during sampling; keeps jets
# away from log/division singularities at box edges.
DOMAIN_MARGIN = 1e-3

COND_LIMIT = 1e12


@dataclass(frozen=True)
class Chart:
    """Local coordinate system with strict-positivity domain constraints."""

    coords: tuple[str, ...]
    constraints: tuple[Expr, ...] = ()

    def __post_init__(self):
        if len(self.coords) < 2:
            raise WefeError("chart needs at least two coordinates")
        if len(set(self.coords)) != len(self.coords):
            raise WefeError("chart coordinate names must be distinct")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def index(self) -> dict:
        return {name: i for i, name in enumerate(self.coords)}

    def check_point(self, point: dict, params: dict, margin: float = 0.0):
        """Raise unless every constraint expression is > margin at the point."""
        for c in self.constraints:
            v = exprdsl.eval_value(c, point, params)
            if not v > margin:
                raise DomainConstraintError(
                    f"constraint {exprdsl.serialize(c)!r} = {v} "
                    f"not > {margin} at {point}"
                )


@dataclass(frozen=True)
class MetricSpec:
    """Symmetric matrix of expressions over a chart.  Components are given
    for i <= j and mirrored; omitted components are zero."""

    chart: Chart
    components: dict  # (i, j) with i <= j -> Expr
    riemannian: bool = False

    def component(self, i: int, j: int):
        if i > j:
            i, j = j, i
        return self.components.get((i, j))


@dataclass(frozen=True)
class DensitySpec:
    """Positive scalar field over a chart (the density h, a warping
    function, or any named scalar used in the weighted tensors)."""

    chart: Chart
    expr: Expr


def metric_eval(m: MetricSpec, point: dict, params: dict, order: int) -> np.ndarray:
    """Evaluate the metric as an (n, n) object array of jets.  The (i, j)
    and (j, i) entries share one Jet, so symmetry is exact."""
    chart = m.chart
    chart.check_point(point, params)
    n = chart.dim
    cindex = chart.index
    g = np.empty((n, n), dtype=object)
    zero = Jet.constant(0.0, n, order)
    for i in range(n):
        for j in range(i, n):
            e = m.component(i, j)
            jet = (
                zero
                if e is None
                else exprdsl.eval_jet(e, point, params, n, order, cindex)
            )
            g[i, j] = jet
            g[j, i] = jet
    return g


def values(arr: np.ndarray) -> np.ndarray:
    """Float array of value parts of a jet-valued array."""
    out = np.empty(arr.shape)
    for idx in np.ndindex(arr.shape):
        entry = arr[idx]
        out[idx] = entry.value() if isinstance(entry, Jet) else float(entry)
    return out


def truncate(arr: np.ndarray, order: int) -> np.ndarray:
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        out[idx] = arr[idx].truncate(order)
    return out


def jet_order(arr: np.ndarray) -> int:
    return arr.flat[0].order


def jet_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n, m = a.shape[0], b.shape[1]
    k = a.shape[1]
    out = np.empty((n, m), dtype=object)
    for i in range(n):
        for j in range(m):
            acc = a[i, 0] * b[0, j]
            for l in range(1, k):
                acc = acc + a[i, l] * b[l, j]
            out[i, j] = acc
    return out


def metric_inverse(g: np.ndarray) -> np.ndarray:
    """Jet-valued inverse of a jet-valued matrix.

    The value part is inverted by a direct linear solve; higher orders come
    from the Neumann series in the nilpotent remainder, which terminates at
    the jet order and makes g * g^{-1} = identity hold order by order.
    """
    n = g.shape[0]
    order = jet_order(g)
    g0 = values(g)
    cond = np.linalg.cond(g0)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMetricError(
            f"metric value matrix is singular or ill-conditioned (cond={cond:.3e})"
        )
    g0_inv = np.linalg.inv(g0)

    def const_matrix(mat):
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = Jet.constant(float(mat[i, j]), n, order)
        return out

    g0_inv_j = const_matrix(g0_inv)
    # remainder N = g - g0 has zero value part, hence nilpotent in jets
    remainder = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            remainder[i, j] = g[i, j] - float(g0[i, j])
    m = jet_matmul(g0_inv_j, remainder)  # g0^{-1} N, nilpotent
    # g^{-1} = sum_{k=0..order} (-g0^{-1} N)^k g0^{-1}
    total = g0_inv_j.copy()
    power = None
    for k in range(order):
        power = m if power is None else jet_matmul(power, m)
        sign = -1.0 if k % 2 == 0 else 1.0
        contrib = jet_matmul(power, g0_inv_j)
        for i in range(n):
            for j in range(n):
                total[i, j] = total[i, j] + sign * contrib[i, j]
    # enforce exact symmetry by sharing entries
    sym = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            entry = (total[i, j] + total[j, i]) * 0.5
            sym[i, j] = entry
            sym[j, i] = entry
    return sym


def jacobi_eigenvalues(matrix: np.ndarray, tol: float = 1e-12, sweeps: int = 50):
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations."""
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(a[p, q]))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < tol:
                    continue
                theta = 0.5 * math.atan2(2.0 * a[p, q], a[q, q] - a[p, p])
                c, s = math.cos(theta), math.sin(theta)
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


def signature(g_values: np.ndarray, zero_tol: float = 1e-10):
    """(n_minus, n_plus) eigenvalue counts of a symmetric value matrix.
    Raises if any eigenvalue is within zero_tol * scale of zero."""
    g_values = np.asarray(g_values, dtype=float)
    if g_values.ndim != 2 or g_values.shape[0] != g_values.shape[1]:
        raise WefeError("signature expects a square matrix")
    if not np.allclose(g_values, g_values.T, atol=1e-12):
        raise WefeError("signature expects a symmetric matrix")
    eig = jacobi_eigenvalues(g_values)
    scale = 1.0 + float(np.max(np.abs(g_values)))
    if np.any(np.abs(eig) < zero_tol * scale):
        raise SignatureError(
            f"near-degenerate eigenvalue in {eig}; metric too close to singular"
        )
    n_minus = int(np.sum(eig < 0))
    return n_minus, g_values.shape[0] - n_minus


@dataclass
class PointTensor:
    """Dense tensor at a point.  variance[k] is "u" (contravariant) or
    "d" (covariant) for slot k; components may be floats or jets."""

    variance: tuple[str, ...]
    components: np.ndarray
    point: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.components.shape[0] if self.components.ndim else 0

    @property
    def rank(self) -> int:
        return len(self.variance)

    def value_array(self) -> np.ndarray:
        if self.components.dtype == object:
            return values(self.components)
        return np.asarray(self.components, dtype=float)


def contract_slot(matrix: np.ndarray, arr: np.ndarray, slot: int) -> np.ndarray:
    """Contract matrix[a, k] with arr[..., k, ...] over the given slot."""
    moved = np.moveaxis(arr, slot, 0)
    n = matrix.shape[0]
    if arr.dtype == object:
        flat = moved.reshape(n, -1)
        out = np.empty_like(flat)
        for col in range(flat.shape[1]):
            for a in range(n):
                acc = matrix[a, 0] * flat[0, col]
                for k in range(1, n):
                    acc = acc + matrix[a, k] * flat[k, col]
                out[a, col] = acc
        result = out.reshape(moved.shape)
    else:
        result = np.tensordot(np.asarray(matrix, dtype=float), moved, axes=(1, 0))
    return np.moveaxis(result, 0, slot)


def raise_lower(t: PointTensor, slot: int, g: np.ndarray, g_inv: np.ndarray) -> PointTensor:
    """Flip the variance of one slot by contraction with g or g^{-1}."""
    if not 0 <= slot < t.rank:
        raise JetError(f"slot {slot} out of range for rank-{t.rank} tensor")
    if t.variance[slot] == "d":
        matrix, new = g_inv, "u"
    else:
        matrix, new = g, "d"
    comps = contract_slot(matrix, t.components, slot)
    variance = tuple(
        new if k == slot else v for k, v in enumerate(t.variance)
    )
    return PointTensor(variance, comps, t.point)
