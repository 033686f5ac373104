"""Classification checks, the identity suite and verification reports.

Per-point checks (nilpotency index of the Ricci operator, gradient causal
type and recurrence, Kundt test, null Weyl contractions, curvature
identities) are pure functions of a Geometry; verify_family drives them
over seeded samples and reduces the results into a VerificationReport.
All tolerances are relative: a residual r passes when r < tol * scale,
with scale built as 1 + the largest magnitude entering the check.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from collections import Counter

import numpy as np

from . import catalog
from .catalog import KUNDT_CONVENTIONS, FamilyInstance
from .curvature import Geometry, divergence, scale_of
from .errors import FamilyError, WefeError
from .tensorcore import values

# Below this relative size a gradient norm-square counts as lightlike and a
# gradient vector counts as zero.
LIGHTLIKE_TOL = 1e-10

# A sample is excluded from the modal-classification vote when its
# discriminating quantity sits within this multiple of the tolerance.
DEGENERATE_FACTOR = 10.0


def thread_count() -> int:
    """Worker count for per-point checks; WEFE_THREADS overrides."""
    env = os.environ.get("WEFE_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise WefeError(f"WEFE_THREADS must be an integer, got {env!r}")
        if n < 1:
            raise WefeError("WEFE_THREADS must be >= 1")
        return n
    return min(4, os.cpu_count() or 1)


# -- pointwise classification ----------------------------------------------


def nilpotency_index(ric: np.ndarray, tol: float = 1e-9) -> int:
    """Smallest k <= n with ||Ric^k||_max < tol * scale^k, else 0.
    The zero operator gets index 1; scale = 1 + ||Ric||_max."""
    a = np.asarray(ric, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise WefeError("nilpotency_index expects a square matrix")
    n = a.shape[0]
    scale = 1.0 + float(np.max(np.abs(a)))
    power = np.eye(n)
    for k in range(1, n + 1):
        power = power @ a
        if float(np.max(np.abs(power))) < tol * scale**k:
            return k
    return 0


def gradient_status(grad: np.ndarray, hes_mixed: np.ndarray,
                    tol: float = 1e-9) -> str:
    """Causal behaviour of the density gradient under the Hessian operator:
    "parallel" when Hes_h vanishes, "recurrent-not-parallel" when the
    Hessian operator maps every direction into the line of the gradient
    (tested through 2x2 minors, no division), "neither" otherwise."""
    v = np.asarray(grad, dtype=float)
    h = np.asarray(hes_mixed, dtype=float)
    scale = scale_of(v, h)
    if float(np.max(np.abs(v))) < LIGHTLIKE_TOL * scale:
        raise WefeError("gradient_status needs a nonvanishing gradient")
    if float(np.max(np.abs(h))) < tol * scale:
        return "parallel"
    n = v.shape[0]
    for j in range(n):
        col = h[:, j]
        for a in range(n):
            for b in range(a + 1, n):
                if abs(col[a] * v[b] - col[b] * v[a]) >= tol * scale:
                    return "neither"
    return "recurrent-not-parallel"


def geodesic_residual(geo: Geometry) -> float:
    """Max-abs of (nabla_V V)^i for V the density gradient."""
    grad = geo.dpack.grad
    n = geo.chart.dim
    gm = geo.gamma
    acc = np.zeros(n)
    gv = geo.dpack.grad_values
    for i in range(n):
        total = 0.0
        for k in range(n):
            total += gv[k] * grad[i].derivative(k).value()
            for l in range(n):
                total += gm[i, k, l].value() * gv[k] * gv[l]
        acc[i] = total
    return float(np.max(np.abs(acc)))


def is_isotropic(geo: Geometry, tol: float = LIGHTLIKE_TOL) -> bool:
    """Lightlike, nonvanishing density gradient at the point."""
    d = geo.dpack
    scale = scale_of(geo.g_values, d.grad_values)
    nonzero = float(np.max(np.abs(d.grad_values))) >= LIGHTLIKE_TOL * scale
    return nonzero and abs(d.grad_norm_sq) < tol * scale


def kundt_check(geo: Geometry, tol: float = 1e-9) -> bool:
    """Geodesic density gradient with zero expansion, shear and twist.
    Precondition: the gradient is lightlike at the point."""
    from .curvature import optical_scalars

    if not is_isotropic(geo):
        raise WefeError("kundt_check requires a lightlike density gradient")
    scale = scale_of(geo.g_values, geo.dpack.grad_values)
    if geodesic_residual(geo) >= tol * scale:
        return False
    opt = optical_scalars(geo.dpack.grad, geo.g, geo.g_inv, geo.gamma)
    worst = max(abs(opt.expansion), abs(opt.shear_sq), abs(opt.twist_sq))
    return worst < tol * scale


def weyl_null_contraction(weyl_values: np.ndarray, v_up: np.ndarray):
    """(iota_V C)_{jkl} = V^i C_{ijkl} and its max-abs summary."""
    c = np.asarray(weyl_values, dtype=float)
    if c.ndim != 4:
        raise WefeError("weyl_null_contraction expects a (0,4) value array")
    if c.shape[0] < 4:
        raise WefeError("the conformal curvature vanishes below dimension 4")
    contracted = np.einsum("i,ijkl->jkl", np.asarray(v_up, dtype=float), c)
    return contracted, float(np.max(np.abs(contracted)))


# -- identity suite --------------------------------------------------------


def riemann_symmetry_residuals(geo: Geometry) -> dict:
    """Max-abs residual of each algebraic curvature symmetry."""
    r = geo.pack.riemann_values
    scale = scale_of(r)
    return {
        "antisym_first_pair": float(np.max(np.abs(r + r.transpose(1, 0, 2, 3)))) / scale,
        "antisym_last_pair": float(np.max(np.abs(r + r.transpose(0, 1, 3, 2)))) / scale,
        "pair_symmetry": float(np.max(np.abs(r - r.transpose(2, 3, 0, 1)))) / scale,
        "first_bianchi": float(
            np.max(np.abs(r + r.transpose(1, 2, 0, 3) + r.transpose(2, 0, 1, 3)))
        ) / scale,
    }


def metric_compatibility_residual(geo: Geometry) -> float:
    """Max-abs of nabla g, relative to the metric scale."""
    from .curvature import cov_derivative

    nab = values(cov_derivative(geo.g, geo.gamma))
    return float(np.max(np.abs(nab))) / scale_of(geo.g_values)


def contracted_bianchi_residual(geo: Geometry) -> float:
    """Max-abs of div(rho) - d(tau)/2, relative to curvature scale."""
    div_ric = values(divergence(geo.pack.ricci, geo.g_inv, geo.gamma))
    n = geo.chart.dim
    dtau = np.array([geo.pack.tau.derivative(i).value() for i in range(n)])
    resid = div_ric - 0.5 * dtau
    return float(np.max(np.abs(resid))) / scale_of(div_ric, dtau)


def bochner_residual(geo: Geometry) -> float:
    """Max-abs of div(Hes_h) - d(Delta h) - rho(grad h), relative scale."""
    d = geo.dpack
    n = geo.chart.dim
    div_hes = values(divergence(d.hessian, geo.g_inv, geo.gamma))
    dlap = np.array([d.laplacian.derivative(i).value() for i in range(n)])
    rho_grad = geo.pack.ricci_values @ d.grad_values
    resid = div_hes - dlap - rho_grad
    return float(np.max(np.abs(resid))) / scale_of(div_hes, dlap, rho_grad)


def trace_residual(geo: Geometry) -> float:
    """Trace consistency of the weighted field tensor:
    g^{ij} G^h_{ij} = h tau + (n-1) Delta h + n Lambda."""
    n = geo.chart.dim
    d = geo.dpack
    tr = float(np.sum(geo.g_inv_values * values(geo.gh)))
    expected = (
        d.h.value() * geo.pack.tau_value
        + (n - 1) * d.laplacian.value()
        + n * d.lam
    )
    scale = scale_of(np.array([tr, expected]))
    return abs(tr - expected) / scale


def gh_residual(geo: Geometry) -> float:
    """Max-abs of the weighted field tensor, relative to the size of its
    three summands."""
    d = geo.dpack
    h = d.h.value()
    lam_term = d.laplacian.value() + d.lam
    scale = scale_of(
        h * geo.pack.ricci_values, d.hessian_values, lam_term * geo.g_values
    )
    return float(np.max(np.abs(geo.gh_values))) / scale


def identity_residuals(geo: Geometry) -> dict:
    """All identity-suite residuals (relative) at one point."""
    out = dict(riemann_symmetry_residuals(geo))
    out["metric_compatibility"] = metric_compatibility_residual(geo)
    out["contracted_bianchi"] = contracted_bianchi_residual(geo)
    if geo.density is not None:
        out["bochner"] = bochner_residual(geo)
        out["trace"] = trace_residual(geo)
    return out


# -- per-point record and family verification ------------------------------


@dataclass
class Classification:
    nilpotency: int
    gradient_status: str | None  # None when the gradient vanishes
    kundt: bool
    isotropic: bool


@dataclass
class PointRecord:
    point: dict
    residuals: dict  # gh, bianchi, bochner, trace (relative)
    classification: Classification
    excluded: bool = False  # out of the modal vote (degenerate sample)


@dataclass
class VerificationReport:
    family_id: str
    params: dict
    seed: int
    order: int
    tol: float
    convention: str | None
    points: list = field(default_factory=list)
    max_residuals: dict = field(default_factory=dict)
    modal: Classification | None = None
    agreement: float = 0.0  # share of non-excluded samples in the mode
    verdict: str = "fail"
    notes: list = field(default_factory=list)


def classify_point(geo: Geometry, tol: float = 1e-9) -> Classification:
    iso = is_isotropic(geo)
    nil = nilpotency_index(geo.ricci_operator, tol)
    d = geo.dpack
    scale = scale_of(geo.g_values, d.grad_values)
    status = None
    if float(np.max(np.abs(d.grad_values))) >= LIGHTLIKE_TOL * scale:
        hes_mixed = geo.g_inv_values @ d.hessian_values
        status = gradient_status(d.grad_values, hes_mixed, tol)
    kundt = kundt_check(geo, tol) if iso else False
    return Classification(nil, status, kundt, iso)


def point_record(instance: FamilyInstance, point: dict, order: int,
                 tol: float) -> PointRecord:
    real_params = {
        k: v for k, v in instance.params.items() if isinstance(v, float)
    }
    geo = Geometry(
        instance.metric, point, real_params, order=order,
        density=instance.density, lam=instance.lam,
    )
    residuals = {
        "gh": gh_residual(geo),
        "bianchi": contracted_bianchi_residual(geo),
        "bochner": bochner_residual(geo),
        "trace": trace_residual(geo),
    }
    cls = classify_point(geo, tol)
    excluded = False
    k = instance.tags.nilpotency if instance.tags is not None else 0
    if cls.nilpotency != k and k > 1:
        # the expected index demands ||Ric^{k-1}|| visibly nonzero; when
        # that discriminant nearly vanishes the sample is degenerate
        power = np.linalg.matrix_power(geo.ricci_operator, k - 1)
        scale = 1.0 + float(np.max(np.abs(geo.ricci_operator)))
        if float(np.max(np.abs(power))) < DEGENERATE_FACTOR * tol * scale ** (k - 1):
            excluded = True
    return PointRecord(point, residuals, cls, excluded)


def verify_family(instance: FamilyInstance, count: int = 200, seed: int = 0,
                  order: int = 3, tol: float = 1e-9,
                  threads: int | None = None) -> VerificationReport:
    """Sample the family, run residual and classification checks at every
    point and reduce to a report.  The verdict is "pass" when every
    residual beats the tolerance at every point and the modal
    classification matches the family's expected tags."""
    points = catalog.sample_points(instance, count, seed)
    workers = threads if threads is not None else thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(
                pool.map(lambda p: point_record(instance, p, order, tol), points)
            )
    else:
        records = [point_record(instance, p, order, tol) for p in points]

    report = VerificationReport(
        instance.family_id, dict(instance.params), seed, order, tol,
        instance.convention, records,
    )
    keys = ("gh", "bianchi", "bochner", "trace")
    report.max_residuals = {
        k: max(r.residuals[k] for r in records) for k in keys
    }
    voters = [r for r in records if not r.excluded]
    if not voters:
        report.notes.append("all samples degenerate; no modal classification")
        return report
    tally = Counter(
        (r.classification.nilpotency, r.classification.gradient_status,
         r.classification.kundt, r.classification.isotropic)
        for r in voters
    )
    (mode, hits) = tally.most_common(1)[0]
    report.modal = Classification(*mode)
    report.agreement = hits / len(voters)
    excluded = len(records) - len(voters)
    if excluded:
        report.notes.append(f"{excluded} degenerate samples excluded")

    tags = instance.tags
    residuals_ok = all(v < tol for v in report.max_residuals.values())
    if tags is None:
        # ad-hoc metric without expected tags: residuals decide alone
        tags_ok = True
    else:
        tags_ok = (
            report.modal.nilpotency == tags.nilpotency
            and report.modal.isotropic == tags.isotropic
            and report.agreement >= 0.99
        )
    if not residuals_ok:
        report.notes.append("residual tolerance exceeded")
    if not tags_ok:
        report.notes.append(
            f"classification {report.modal} disagrees with expected tags {tags}"
        )
    report.verdict = "pass" if (residuals_ok and tags_ok) else "fail"
    return report


@dataclass
class ConventionResolution:
    selected: str | None  # "du" or "2du"; None when ambiguous
    ambiguous: bool
    max_residuals: dict  # convention -> max relative gh residual


def resolve_kundt_convention(instance: FamilyInstance, count: int = 20,
                             seed: int = 0, order: int = 3,
                             tol: float = 1e-9) -> ConventionResolution:
    """Build both cross-term conventions of the Kundt family, check the
    field-equation residual on shared samples and pick the variant that
    solves it.  Both or neither passing is reported, not raised."""
    if instance.family_id != "kundt-3d":
        raise FamilyError(
            "convention resolution applies to the kundt-3d family only"
        )
    points = catalog.sample_points(instance, count, seed)
    outcomes = {}
    for conv in KUNDT_CONVENTIONS:
        metric = catalog.kundt_metric(instance.params, conv)
        worst = 0.0
        for p in points:
            geo = Geometry(
                metric, p, order=order, density=instance.density,
                lam=instance.lam,
            )
            worst = max(worst, gh_residual(geo))
        outcomes[conv] = worst
    passing = [c for c, r in outcomes.items() if r < tol]
    if len(passing) == 1:
        return ConventionResolution(passing[0], False, outcomes)
    return ConventionResolution(None, True, outcomes)
