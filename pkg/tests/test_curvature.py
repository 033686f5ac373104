"""Curvature tests: connection coefficients against a finite-difference
oracle, golden curvature values on closed-form spacetimes, algebraic
properties of the derived tensors."""

import math

import numpy as np
import pytest
from conftest import box_points, perturbed_minkowski

from wefe import exprdsl
from wefe.curvature import (
    Geometry,
    bakry_emery,
    cpe_tensor,
    cov_derivative,
    optical_scalars,
    scalar_invariants,
    warped_product,
)
from wefe.errors import WefeError
from wefe.tensorcore import Chart, DensitySpec, MetricSpec, values


def parse_metric(coords, comps, constraints=(), params=()):
    cs = tuple(exprdsl.parse(c, coords, params) for c in constraints)
    chart = Chart(tuple(coords), cs)
    parsed = {
        ij: exprdsl.parse(text, coords, params) for ij, text in comps.items()
    }
    return MetricSpec(chart, parsed)


def brinkmann(f_text, extra=None, coords=("u", "v", "x"), constraints=()):
    comps = {(0, 1): "1", (1, 1): f_text}
    for i in range(2, len(coords)):
        comps[(i, i)] = "1"
    if extra:
        comps.update(extra)
    return parse_metric(coords, comps, constraints)


def geometry(metric, point, density_text=None, lam=0.0, params=None):
    density = None
    if density_text is not None:
        density = DensitySpec(
            metric.chart,
            exprdsl.parse(density_text, metric.chart.coords, tuple(params or ())),
        )
    return Geometry(metric, point, params, order=3, density=density, lam=lam)


def de_sitter(kappa_text="kappa"):
    coords = ("x", "y", "z")
    return parse_metric(coords, {
        (0, 0): f"-({kappa_text}^2)*cos(y)^2",
        (1, 1): f"{kappa_text}^2",
        (2, 2): f"{kappa_text}^2*sin(y)^2",
    }, params=("kappa",))


# -- flat space ------------------------------------------------------------


def test_flat_metric_is_flat():
    metric, _ = perturbed_minkowski(0, amp=0.0, with_density=False)
    geo = geometry(metric, {"t": 0.3, "x": -0.2, "y": 0.5})
    assert np.max(np.abs(values(geo.gamma))) == 0.0
    assert np.max(np.abs(geo.pack.riemann_values)) == 0.0
    assert geo.pack.tau_value == 0.0
    tau, ricci_sq, kret = scalar_invariants(geo.pack, geo.g_inv_values)
    assert (tau, ricci_sq, kret) == (0.0, 0.0, 0.0)
    assert np.max(np.abs(geo.weyl_values)) == 0.0


# -- Christoffel symbols against a finite-difference oracle ----------------


def fd_christoffel(metric, point, h=1e-6):
    """Independent oracle: Gamma^k_ij = 1/2 g^kl (d_i g_lj + d_j g_il -
    d_l g_ij) with central-difference metric partials through plain float
    evaluation."""
    coords = metric.chart.coords
    n = len(coords)

    def g_at(p):
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(i, n):
                e = metric.component(i, j)
                v = exprdsl.eval_value(e, p, {}) if e is not None else 0.0
                out[i, j] = out[j, i] = v
        return out

    dg = np.zeros((n, n, n))  # dg[l, i, j] = d_l g_ij
    for l, name in enumerate(coords):
        plus = dict(point)
        minus = dict(point)
        plus[name] += h
        minus[name] -= h
        dg[l] = (g_at(plus) - g_at(minus)) / (2 * h)
    gi = np.linalg.inv(g_at(point))
    gamma = np.zeros((n, n, n))  # gamma[k, i, j]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                total = 0.0
                for l in range(n):
                    total += gi[k, l] * (dg[i, l, j] + dg[j, i, l] - dg[l, i, j])
                gamma[k, i, j] = 0.5 * total
    return gamma


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_christoffel_matches_finite_differences(seed):
    metric, _ = perturbed_minkowski(seed, with_density=False)
    for point in box_points(seed, count=3):
        geo = geometry(metric, point)
        ours = values(geo.gamma)
        oracle = fd_christoffel(metric, point)
        assert np.max(np.abs(ours - oracle)) < 1e-8


# -- golden curvature values -----------------------------------------------


def test_de_sitter_scalar_curvature():
    metric = de_sitter()
    point = {"x": 0.2, "y": 1.0, "z": 0.3}
    for kappa, expected in ((1.0, 6.0), (2.0, 1.5)):
        geo = geometry(metric, point, params={"kappa": kappa})
        assert geo.pack.tau_value == pytest.approx(expected, abs=1e-10)
    geo = geometry(metric, point, params={"kappa": 1.0})
    tau, ricci_sq, kret = scalar_invariants(geo.pack, geo.g_inv_values)
    assert ricci_sq == pytest.approx(12.0, abs=1e-9)
    assert kret == pytest.approx(12.0, abs=1e-9)


def test_anti_de_sitter_scalar_curvature():
    coords = ("x", "y", "z")
    metric = parse_metric(coords, {
        (0, 0): "-(kappa^2)*cosh(y)^2",
        (1, 1): "kappa^2",
        (2, 2): "kappa^2*sinh(y)^2",
    }, constraints=("y",), params=("kappa",))
    geo = geometry(metric, {"x": 0.1, "y": 0.8, "z": 0.4}, params={"kappa": 1.0})
    assert geo.pack.tau_value == pytest.approx(-6.0, abs=1e-10)


def test_brinkmann_ricci_single_component():
    # wave metric with profile F: the only Ricci component is
    # rho_vv = -(1/2) d^2F/dx^2
    metric = brinkmann("sin(v)*x^2 + v*x^3")
    point = {"u": 0.4, "v": 0.9, "x": 0.6}
    geo = geometry(metric, point)
    rho = geo.pack.ricci_values
    expected = -0.5 * (2 * math.sin(0.9) + 6 * 0.6 * 0.9)
    assert rho[1, 1] == pytest.approx(expected, abs=1e-12)
    mask = np.ones((3, 3), dtype=bool)
    mask[1, 1] = False
    assert np.max(np.abs(rho[mask])) < 1e-12


def test_brinkmann_tau_is_second_u_derivative_of_profile():
    # with a u-dependent profile, tau = d^2F/du^2
    metric = brinkmann("u^2*sin(v) + x*u")
    geo = geometry(metric, {"u": 0.3, "v": 1.1, "x": -0.4})
    assert geo.pack.tau_value == pytest.approx(2 * math.sin(1.1), abs=1e-12)


def test_transverse_curvature_golden_component():
    # 4-dim wave with a cross term: R(d_x1, d_x2, d_v, d_x2) = 1/2
    coords = ("u", "v", "x1", "x2")
    metric = parse_metric(coords, {
        (0, 1): "1",
        (1, 1): "-(x1*u) + (-(2*v^2*x1^3*x2) - v*x1^4 + 3*v*x1^2*x2^2"
                " + 12*v*x1^2*x2 + x1^3)/(6*v)",
        (1, 3): "x1*x2 + v*x2^2",
        (2, 2): "1",
        (3, 3): "1",
    }, constraints=("v",))
    geo = geometry(metric, {"u": 0.7, "v": 0.8, "x1": 0.5, "x2": 1.1})
    r = geo.pack.riemann_values
    assert r[2, 3, 1, 3] == pytest.approx(0.5, abs=1e-9)


# -- Weyl tensor -----------------------------------------------------------


def test_weyl_vanishes_in_three_dimensions():
    metric, _ = perturbed_minkowski(4, with_density=False)
    geo = geometry(metric, {"t": 0.1, "x": 0.2, "y": -0.3})
    assert np.max(np.abs(geo.weyl_values)) == 0.0


def test_weyl_traceless_in_four_dimensions():
    coords = ("t", "x", "y", "z")
    metric, _ = perturbed_minkowski(5, coords=coords, with_density=False)
    geo = geometry(metric, {"t": 0.1, "x": 0.2, "y": -0.3, "z": 0.15})
    w = geo.weyl_values
    trace = np.einsum("ik,ijkl->jl", geo.g_inv_values, w)
    scale = 1.0 + np.max(np.abs(w))
    assert np.max(np.abs(trace)) < 1e-11 * scale
    # algebraic symmetries carry over from the curvature tensor
    assert np.max(np.abs(w + w.transpose(1, 0, 2, 3))) < 1e-11 * scale
    assert np.max(np.abs(w - w.transpose(2, 3, 0, 1))) < 1e-11 * scale


def test_warped_wave_weyl_golden_value():
    # plane wave base warped by its own profile: W(d_v, d_x, d_v, d_x)
    # equals the second derivative ratio alpha''/alpha
    coords = ("u", "v", "x")
    alpha = "2+sin(v)"
    app_over_a = f"(-sin(v))/({alpha})"
    base = brinkmann(f"-({app_over_a})*x^2")
    warp = DensitySpec(base.chart, exprdsl.parse(alpha, coords))
    metric = warped_product(base, warp)
    point = {"u": 0.5, "v": 1.2, "x": 0.7, "t": 0.0}
    geo = Geometry(metric, point, order=3)
    assert np.max(np.abs(geo.pack.ricci_values)) < 1e-12
    expected = -math.sin(1.2) / (2 + math.sin(1.2))
    assert geo.weyl_values[1, 2, 1, 2] == pytest.approx(expected, rel=1e-9)


def test_warped_product_fiber_collision():
    base = brinkmann("x^2")
    warp = DensitySpec(base.chart, exprdsl.parse("v", ("u", "v", "x")))
    with pytest.raises(WefeError):
        warped_product(base, warp, fiber_coord="x")


# -- density pack and weighted tensors -------------------------------------


def test_density_pack_flat_hand_values():
    metric, _ = perturbed_minkowski(0, amp=0.0, with_density=False)
    geo = geometry(metric, {"t": 0.0, "x": 2.0, "y": 1.0},
                   density_text="x^2 + 2*y + 1")
    d = geo.dpack
    assert d.h.value() == pytest.approx(7.0)
    assert np.allclose(values(d.dh), [0.0, 4.0, 2.0])
    hes = d.hessian_values
    assert hes[1, 1] == pytest.approx(2.0)
    assert np.max(np.abs(hes - np.diag([0.0, 2.0, 0.0]))) < 1e-12
    # flat laplacian: g^ij Hes_ij with eta = diag(-1, 1, 1)
    assert d.laplacian.value() == pytest.approx(2.0)
    assert d.grad_norm_sq == pytest.approx(16.0 + 4.0)


def test_density_must_be_positive():
    metric, _ = perturbed_minkowski(0, amp=0.0, with_density=False)
    geo = geometry(metric, {"t": 0.0, "x": 0.0, "y": 0.0}, density_text="-1")
    with pytest.raises(WefeError):
        geo.dpack


def test_weighted_tensor_flat_constant_density():
    # h = 1 on flat space: G^h = Lambda g
    metric, _ = perturbed_minkowski(0, amp=0.0, with_density=False)
    geo = geometry(metric, {"t": 0.1, "x": 0.2, "y": 0.3},
                   density_text="1", lam=0.7)
    assert np.allclose(geo.gh_values, 0.7 * geo.g_values, atol=1e-14)


def test_bakry_emery_flat_linear_density():
    # flat space, f = x: Hes_f = 0, so rho^f = -mu dx (x) dx
    metric, _ = perturbed_minkowski(0, amp=0.0, with_density=False)
    geo = geometry(metric, {"t": 0.0, "x": 1.0, "y": 0.0}, density_text="x + 2")
    out = values(bakry_emery(geo.pack, geo.dpack, mu=2.0))
    expected = np.zeros((3, 3))
    expected[1, 1] = -2.0
    assert np.allclose(out, expected, atol=1e-14)


def test_cpe_tensor_flat_zero_density_shift():
    # flat space, constant f: every term of the critical-point tensor dies
    metric, _ = perturbed_minkowski(0, amp=0.0, with_density=False)
    geo = geometry(metric, {"t": 0.0, "x": 0.0, "y": 0.0}, density_text="1")
    out = values(cpe_tensor(geo.pack, geo.dpack, geo.g))
    assert np.max(np.abs(out)) < 1e-14


def test_metric_is_parallel():
    metric, _ = perturbed_minkowski(6, with_density=False)
    for point in box_points(6, count=2):
        geo = geometry(metric, point)
        nab = values(cov_derivative(geo.g, geo.gamma))
        assert np.max(np.abs(nab)) < 1e-12


# -- optical scalars -------------------------------------------------------


def test_optical_scalars_of_wave_gradient():
    metric = brinkmann("sin(v)*x^2")
    geo = geometry(metric, {"u": 0.2, "v": 0.8, "x": 0.4}, density_text="v")
    opt = optical_scalars(geo.dpack.grad, geo.g, geo.g_inv, geo.gamma)
    assert abs(opt.expansion) < 1e-12
    assert abs(opt.shear_sq) < 1e-12
    assert abs(opt.twist_sq) < 1e-12
    assert opt.shear_sq == pytest.approx(opt.shear_sq_sym_form, abs=1e-12)


def test_optical_scalars_reject_non_lightlike():
    metric, _ = perturbed_minkowski(0, amp=0.0, with_density=False)
    geo = geometry(metric, {"t": 0.0, "x": 0.0, "y": 0.0}, density_text="x + 2")
    with pytest.raises(WefeError):
        optical_scalars(geo.dpack.grad, geo.g, geo.g_inv, geo.gamma)


def test_geometry_requires_density_for_weighted_parts():
    metric, _ = perturbed_minkowski(0, amp=0.0, with_density=False)
    geo = geometry(metric, {"t": 0.0, "x": 0.0, "y": 0.0})
    with pytest.raises(WefeError):
        geo.dpack
