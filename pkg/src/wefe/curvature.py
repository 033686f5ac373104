"""Differential-geometric operators on jet-valued metrics.

Sign conventions (pinned so that the printed values of the reference
spacetimes are reproduced: de Sitter scalar curvature +6/kappa^2, and the
single Ricci component of a wave metric coming out as -1/2 of the
transverse Laplacian of the profile):

    R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
    R_{ijkl}  = -g(R(d_i, d_j) d_k, d_l)   (classical-textbook lowered sign)
    rho(X, Y) = trace(Z -> R(Z, X) Y)

The lowered (0,4) tensor and the Weyl tensor carry the sign that makes the
catalogued component tables come out as printed (e.g. the Kundt warped
product has W(d_u, d_v, d_v, d_x) = -1/(v x)); Ricci and scalar curvature
are contraction-convention independent here (de Sitter tau = +6/kappa^2).

Everything here is pure per-point computation; no shared mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import exprdsl
from .errors import WefeError
from .exprdsl import BinOp
from .jets import Jet
from .tensorcore import (
    Chart,
    DensitySpec,
    MetricSpec,
    contract_slot,
    jet_order,
    metric_eval,
    metric_inverse,
    truncate,
    values,
)


def scale_of(*arrays) -> float:
    """Residual normalization: 1 + max absolute value over the inputs."""
    best = 0.0
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if a.size:
            best = max(best, float(np.max(np.abs(a))))
    return 1.0 + best


def partial_array(arr: np.ndarray) -> np.ndarray:
    """d_i applied entrywise: adds a leading axis of length dim, reduces
    the jet order by one."""
    dim = arr.flat[0].dim
    out = np.empty((dim,) + arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        entry = arr[idx]
        for i in range(dim):
            out[(i,) + idx] = entry.derivative(i)
    return out


def christoffel(g: np.ndarray, g_inv: np.ndarray) -> np.ndarray:
    """Levi-Civita connection coefficients Gamma^k_{ij}, jet order K-1.
    Indexed [k, i, j]; symmetric in (i, j)."""
    n = g.shape[0]
    order = jet_order(g)
    if order < 1:
        raise WefeError("christoffel needs metric jets of order >= 1")
    dg = partial_array(g)  # dg[i, j, l] = d_i g_{jl}
    gi = truncate(g_inv, order - 1)
    gamma = np.empty((n, n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            col = [dg[i, j, l] + dg[j, i, l] - dg[l, i, j] for l in range(n)]
            for k in range(n):
                acc = gi[k, 0] * col[0]
                for l in range(1, n):
                    acc = acc + gi[k, l] * col[l]
                entry = acc * 0.5
                gamma[k, i, j] = entry
                gamma[k, j, i] = entry
    return gamma


@dataclass
class CurvaturePack:
    """Curvature data at a point: Riemann (both variants), Ricci, scalar
    curvature, with jet-valued components where derivatives are needed."""

    riemann_up: np.ndarray  # [i, j, k, l] = R^l_{ijk}, last axis up
    riemann_down: np.ndarray  # [i, j, k, l] = R_{ijkl}
    ricci: np.ndarray  # [j, k], jet-valued
    tau: Jet

    @cached_property
    def ricci_values(self) -> np.ndarray:
        return values(self.ricci)

    @cached_property
    def riemann_values(self) -> np.ndarray:
        return values(self.riemann_down)

    @cached_property
    def tau_value(self) -> float:
        return self.tau.value()


def riemann_ricci_scalar(gamma: np.ndarray, g: np.ndarray, g_inv: np.ndarray) -> CurvaturePack:
    """Assemble Riemann, Ricci and scalar curvature from the connection."""
    n = g.shape[0]
    gorder = jet_order(gamma)
    if gorder < 1:
        raise WefeError("riemann needs connection jets of order >= 1")
    order = gorder - 1
    dgamma = partial_array(gamma)  # dgamma[i, l, j, k] = d_i Gamma^l_{jk}
    gm = truncate(gamma, order)
    rup = np.empty((n, n, n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    acc = dgamma[i, l, j, k] - dgamma[j, l, i, k]
                    for m in range(n):
                        acc = acc + gm[l, i, m] * gm[m, j, k]
                        acc = acc - gm[l, j, m] * gm[m, i, k]
                    rup[i, j, k, l] = acc
    gt = truncate(g, order)
    git = truncate(g_inv, order)
    rdown = contract_slot(gt, rup, 3)
    for idx in np.ndindex(rdown.shape):
        rdown[idx] = -rdown[idx]
    ricci = np.empty((n, n), dtype=object)
    for j in range(n):
        for k in range(n):
            acc = rup[0, j, k, 0]
            for i in range(1, n):
                acc = acc + rup[i, j, k, i]
            ricci[j, k] = acc
    tau = None
    for j in range(n):
        for k in range(n):
            term = git[j, k] * ricci[j, k]
            tau = term if tau is None else tau + term
    return CurvaturePack(rup, rdown, ricci, tau)


def weyl(pack: CurvaturePack, g_values: np.ndarray, g_inv_values: np.ndarray) -> np.ndarray:
    """Weyl tensor C_{ijkl} (float components) for n >= 4; identically zero
    by convention for n = 3."""
    g = np.asarray(g_values, dtype=float)
    n = g.shape[0]
    r = pack.riemann_values
    rho = pack.ricci_values
    tau = pack.tau_value
    if n < 4:
        return np.zeros((n, n, n, n))
    c = np.zeros((n, n, n, n))
    for a in range(n):
        for b in range(n):
            for cc in range(n):
                for d in range(n):
                    kn = (
                        g[a, d] * rho[b, cc]
                        - g[b, d] * rho[a, cc]
                        - g[a, cc] * rho[b, d]
                        + g[b, cc] * rho[a, d]
                    )
                    ll = g[a, d] * g[b, cc] - g[a, cc] * g[b, d]
                    # r already carries the lowered sign convention, under
                    # which rho_{bc} = -g^{ad} r_{abcd}; the correction
                    # terms flip accordingly so all traces still vanish
                    c[a, b, cc, d] = (
                        r[a, b, cc, d]
                        + kn / (n - 2)
                        - tau * ll / ((n - 1) * (n - 2))
                    )
    return c


@dataclass
class DensityPack:
    """Density-derived data at a point."""

    h: Jet
    dh: np.ndarray  # down, jet-valued
    grad: np.ndarray  # up, jet-valued
    hessian: np.ndarray  # down-down, jet-valued
    laplacian: Jet
    grad_norm_sq: float
    lam: float
    mu: float

    @cached_property
    def hessian_values(self) -> np.ndarray:
        return values(self.hessian)

    @cached_property
    def grad_values(self) -> np.ndarray:
        return values(self.grad)


def density_pack(h_jet: Jet, g: np.ndarray, g_inv: np.ndarray, gamma: np.ndarray,
                 lam: float = 0.0, mu: float = 1.0,
                 require_positive: bool = True) -> DensityPack:
    """Gradient, Hessian, Laplacian and causal data of a scalar field."""
    if require_positive and not h_jet.value() > 0.0:
        raise WefeError(f"density must be positive at the point, got {h_jet.value()}")
    n = g.shape[0]
    order = h_jet.order - 2
    if order < 0:
        raise WefeError("density jets must have order >= 2")
    dh = np.empty((n,), dtype=object)
    for i in range(n):
        dh[i] = h_jet.derivative(i).truncate(order)
    gi = truncate(g_inv, order)
    grad = contract_slot(gi, dh, 0)
    gm = truncate(gamma, order)
    hes = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            acc = h_jet.derivative(i).derivative(j)
            for k in range(n):
                acc = acc - gm[k, i, j] * dh[k]
            hes[i, j] = acc
            hes[j, i] = acc
    lap = None
    for i in range(n):
        for j in range(n):
            term = gi[i, j] * hes[i, j]
            lap = term if lap is None else lap + term
    dh_v = values(dh)
    gi_v = values(truncate(g_inv, 0))
    norm_sq = float(dh_v @ gi_v @ dh_v)
    return DensityPack(h_jet, dh, grad, hes, lap, norm_sq, lam, mu)


def weighted_einstein(pack: CurvaturePack, d: DensityPack, g: np.ndarray) -> np.ndarray:
    """G^h = h rho - Hes_h + (Delta h + Lambda) g, jet-valued."""
    n = g.shape[0]
    order = min(jet_order(d.hessian), jet_order(pack.ricci))
    rho = truncate(pack.ricci, order)
    hes = truncate(d.hessian, order)
    gt = truncate(g, order)
    h = d.h.truncate(order)
    lam_term = d.laplacian.truncate(order) + d.lam
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            entry = h * rho[i, j] - hes[i, j] + lam_term * gt[i, j]
            out[i, j] = entry
            out[j, i] = entry
    return out


def bakry_emery(pack: CurvaturePack, f: DensityPack, mu: float) -> np.ndarray:
    """rho^f = rho + Hes_f - mu df (x) df, jet-valued."""
    n = pack.ricci.shape[0]
    order = min(jet_order(f.hessian), jet_order(pack.ricci))
    rho = truncate(pack.ricci, order)
    hes = truncate(f.hessian, order)
    df = truncate(f.dh, order)
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            entry = rho[i, j] + hes[i, j] - mu * (df[i] * df[j])
            out[i, j] = entry
            out[j, i] = entry
    return out


def cpe_tensor(pack: CurvaturePack, f: DensityPack, g: np.ndarray) -> np.ndarray:
    """(f + 1) rho - Hes_f + (Delta f - tau/n) g, jet-valued."""
    n = g.shape[0]
    order = min(jet_order(f.hessian), jet_order(pack.ricci))
    rho = truncate(pack.ricci, order)
    hes = truncate(f.hessian, order)
    gt = truncate(g, order)
    fj = f.h.truncate(order)
    coeff = f.laplacian.truncate(order) - pack.tau.truncate(order) / float(n)
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            entry = (fj + 1.0) * rho[i, j] - hes[i, j] + coeff * gt[i, j]
            out[i, j] = entry
            out[j, i] = entry
    return out


def cov_derivative(t: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Covariant derivative of a fully covariant jet-valued tensor:
    (nabla T)_{k i1..is} = d_k T_{i1..is} - sum_m Gamma^l_{k i_m} T_{..l..}.
    The new covariant slot is the leading axis."""
    order = jet_order(t)
    if order < 1:
        raise WefeError("covariant derivative needs jets of order >= 1")
    n = gamma.shape[0]
    gm = truncate(gamma, order - 1)
    tt = truncate(t, order - 1)
    dt = partial_array(t)
    out = np.empty((n,) + t.shape, dtype=object)
    rank = t.ndim
    for k in range(n):
        for idx in np.ndindex(t.shape):
            acc = dt[(k,) + idx]
            for m in range(rank):
                for l in range(n):
                    swapped = idx[:m] + (l,) + idx[m + 1 :]
                    acc = acc - gm[l, k, idx[m]] * tt[swapped]
            out[(k,) + idx] = acc
    return out


def divergence(t: np.ndarray, g_inv: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """(div T)_j = g^{ik} (nabla T)_{i k j} for a symmetric (0,2) tensor."""
    nab = cov_derivative(t, gamma)
    order = jet_order(nab)
    gi = values(g_inv)
    n = t.shape[0]
    out = np.empty((n,), dtype=object)
    for j in range(n):
        acc = None
        for i in range(n):
            for k in range(n):
                term = nab[i, k, j] * float(gi[i, k])
                acc = term if acc is None else acc + term
        out[j] = acc
    return out


@dataclass
class OpticalScalars:
    expansion: float
    shear_sq: float
    twist_sq: float
    # shear recomputed from the symmetrized derivative only (the form used
    # when the congruence comes from a Hessian); reported so any divergence
    # between the two normalizations is visible
    shear_sq_sym_form: float


def optical_scalars(v_up: np.ndarray, g: np.ndarray, g_inv: np.ndarray,
                    gamma: np.ndarray, lightlike_tol: float = 1e-10) -> OpticalScalars:
    """Expansion, shear and twist of a lightlike vector field:
    theta = nabla_i V^i / (n-2),
    sigma^2 = (nabla^i V^j) nabla_(i V_j) - (n-2) theta^2,
    omega^2 = (nabla^i V^j) nabla_[i V_j],
    with weight-including-1/2 (anti)symmetrization."""
    n = g.shape[0]
    if n < 3:
        raise WefeError("optical scalars need dimension >= 3")
    g_v = values(g)
    v_v = values(v_up)
    norm_sq = float(v_v @ g_v @ v_v)
    scale = scale_of(g_v, v_v)
    if abs(norm_sq) >= lightlike_tol * scale:
        raise WefeError(
            f"vector field is not lightlike at the point (|V|^2 = {norm_sq})"
        )
    order = min(jet_order(v_up), jet_order(gamma))
    order = min(order, jet_order(g))
    vt = truncate(v_up, order)
    gt = truncate(g, order)
    v_down = contract_slot(gt, vt, 0)
    # nabla_i V_j = d_i V_j - Gamma^k_{ij} V_k
    gm = truncate(gamma, order - 1)
    dv = partial_array(v_down)
    a = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            acc = dv[i, j]
            for k in range(n):
                acc = acc - gm[k, i, j] * v_down[k].truncate(order - 1)
            a[i, j] = acc
    a_v = values(a)
    gi_v = values(g_inv)
    theta = float(np.trace(gi_v @ a_v)) / (n - 2)
    a_up = gi_v @ a_v @ gi_v.T  # A^{ij}
    sym = 0.5 * (a_v + a_v.T)
    antisym = 0.5 * (a_v - a_v.T)
    shear_sq = float(np.sum(a_up * sym)) - (n - 2) * theta * theta
    twist_sq = float(np.sum(a_up * antisym))
    sym_up = gi_v @ sym @ gi_v.T
    shear_sq_sym = float(np.sum(sym_up * sym)) - (n - 2) * theta * theta
    return OpticalScalars(theta, shear_sq, twist_sq, shear_sq_sym)


def scalar_invariants(pack: CurvaturePack, g_inv_values: np.ndarray):
    """(tau, rho_ij rho^ij, R_ijkl R^ijkl) with raisings by g^{-1}."""
    gi = np.asarray(g_inv_values, dtype=float)
    rho = pack.ricci_values
    rho_up = gi @ rho @ gi.T
    ricci_sq = float(np.sum(rho * rho_up))
    r = pack.riemann_values
    r_up = np.einsum("abcd,ai,bj,ck,dl->ijkl", r, gi, gi, gi, gi)
    kretschmann = float(np.sum(r * r_up))
    return pack.tau_value, ricci_sq, kretschmann


def warped_product(base: MetricSpec, warp: DensitySpec, fiber_coord: str = "t") -> MetricSpec:
    """Metric of base x_f R: base metric plus f^2 dt^2 on an extra
    coordinate; domain constraints are inherited from the base chart."""
    chart = base.chart
    if fiber_coord in chart.coords:
        raise WefeError(f"fiber coordinate {fiber_coord!r} collides with the chart")
    new_chart = Chart(chart.coords + (fiber_coord,), chart.constraints)
    comps = dict(base.components)
    n = chart.dim
    comps[(n, n)] = BinOp("*", warp.expr, warp.expr)
    return MetricSpec(new_chart, comps, riemannian=base.riemannian)


class Geometry:
    """All pointwise geometric quantities of a metric (and optional density)
    at one sample point, computed lazily and cached.

    The metric is evaluated at jet order `order`; derived objects lose one
    order per differentiation (connection: order-1, curvature: order-2)."""

    def __init__(self, metric: MetricSpec, point: dict, params: dict | None = None,
                 order: int = 3, density: DensitySpec | None = None,
                 lam: float = 0.0, mu: float = 1.0):
        self.metric = metric
        self.chart = metric.chart
        self.point = dict(point)
        self.params = dict(params or {})
        self.order = order
        self.density = density
        self.lam = float(lam)
        self.mu = float(mu)

    @cached_property
    def g(self) -> np.ndarray:
        return metric_eval(self.metric, self.point, self.params, self.order)

    @cached_property
    def g_values(self) -> np.ndarray:
        return values(self.g)

    @cached_property
    def g_inv(self) -> np.ndarray:
        return metric_inverse(self.g)

    @cached_property
    def g_inv_values(self) -> np.ndarray:
        return values(self.g_inv)

    @cached_property
    def gamma(self) -> np.ndarray:
        return christoffel(self.g, self.g_inv)

    @cached_property
    def pack(self) -> CurvaturePack:
        return riemann_ricci_scalar(self.gamma, self.g, self.g_inv)

    @cached_property
    def weyl_values(self) -> np.ndarray:
        return weyl(self.pack, self.g_values, self.g_inv_values)

    @cached_property
    def ricci_operator(self) -> np.ndarray:
        """Mixed Ric^i_j = g^{ik} rho_{kj}, float matrix."""
        return self.g_inv_values @ self.pack.ricci_values

    @cached_property
    def h_jet(self) -> Jet:
        if self.density is None:
            raise WefeError("no density attached to this geometry")
        return exprdsl.eval_jet(
            self.density.expr, self.point, self.params,
            self.chart.dim, self.order, self.chart.index,
        )

    @cached_property
    def dpack(self) -> DensityPack:
        return density_pack(
            self.h_jet, self.g, self.g_inv, self.gamma, self.lam, self.mu
        )

    @cached_property
    def gh(self) -> np.ndarray:
        return weighted_einstein(self.pack, self.dpack, self.g)

    @cached_property
    def gh_values(self) -> np.ndarray:
        return values(self.gh)
