"""Built-in parameterized solution families.

Each family packages a coordinate chart, a metric template, a density
template, a cosmological constant, a parameter schema, a sampling box and
the expected classification tags.  Scalar-function parameters (wave
profiles, Kundt free functions) are accepted as expression strings in one
declared variable; every slot ships with a default so each family
instantiates with zero configuration.

Templates that involve derivatives of a function slot (e.g. the plane-wave
profile enters through its second derivative) are assembled by symbolic
differentiation of the slot expression at instantiation time; evaluation
derivatives always come from jet arithmetic afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import exprdsl
from .curvature import warped_product
from .errors import FamilyError, FamilyPreconditionError, SamplingError
from .exprdsl import BinOp, Call, Expr, Neg, Num, Var
from .tensorcore import DOMAIN_MARGIN, Chart, DensitySpec, MetricSpec

KUNDT_CONVENTIONS = ("2du", "du")
# Cross term of the lightlike coordinate pair: "2du" puts g_uv = 1 (the
# normalization used by the general wave charts), "du" puts g_uv = 1/2.
# resolve_kundt_convention() in the analysis module picks the variant that
# actually solves the field equation; this default records its outcome.
DEFAULT_KUNDT_CONVENTION = "2du"


# -- symbolic derivative for template assembly -----------------------------


def diff(e: Expr, var: str) -> Expr:
    """Derivative of an expression AST with respect to one coordinate.
    Used only to assemble family templates from function-slot parameters."""
    if isinstance(e, Num):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0) if (e.kind == "coord" and e.name == var) else Num(0.0)
    if isinstance(e, Neg):
        return Neg(diff(e.arg, var))
    if isinstance(e, BinOp):
        da, db = diff(e.left, var), diff(e.right, var)
        if e.op == "+":
            return BinOp("+", da, db)
        if e.op == "-":
            return BinOp("-", da, db)
        if e.op == "*":
            return BinOp(
                "+", BinOp("*", da, e.right), BinOp("*", e.left, db)
            )
        if e.op == "/":
            num = BinOp(
                "-", BinOp("*", da, e.right), BinOp("*", e.left, db)
            )
            return BinOp("/", num, BinOp("^", e.right, Num(2.0)))
        if e.op == "^":
            p = e.right.value
            power = BinOp("*", Num(p), BinOp("^", e.left, Num(p - 1.0)))
            return BinOp("*", power, da)
    if isinstance(e, Call):
        inner = diff(e.arg, var)
        u = e.arg
        outer = {
            "exp": lambda: Call("exp", u),
            "log": lambda: BinOp("/", Num(1.0), u),
            "sin": lambda: Call("cos", u),
            "cos": lambda: Neg(Call("sin", u)),
            "sinh": lambda: Call("cosh", u),
            "cosh": lambda: Call("sinh", u),
            "tan": lambda: BinOp("+", Num(1.0), BinOp("^", Call("tan", u), Num(2.0))),
            "arctanh": lambda: BinOp(
                "/", Num(1.0), BinOp("-", Num(1.0), BinOp("^", u, Num(2.0)))
            ),
            "sqrt": lambda: BinOp(
                "/", Num(1.0), BinOp("*", Num(2.0), Call("sqrt", u))
            ),
        }[e.fn]()
        return BinOp("*", outer, inner)
    raise FamilyError(f"cannot differentiate node {e!r}")


# -- schema ----------------------------------------------------------------


@dataclass(frozen=True)
class RealParam:
    name: str
    default: float
    description: str = ""


@dataclass(frozen=True)
class FnParam:
    """Scalar-function slot: an expression string in one declared variable."""

    name: str
    var: str
    default: str
    description: str = ""


@dataclass(frozen=True)
class Tags:
    isotropic: bool
    nilpotency: int  # expected nilpotency index (0 = not nilpotent)
    tau: float  # expected scalar curvature
    family_class: str  # plane-wave | pp-wave | Brinkmann | Kundt |
    #                    Einstein-background | warped-product


@dataclass
class FamilyInstance:
    family_id: str
    params: dict
    metric: MetricSpec
    density: DensitySpec
    lam: float
    tags: Tags | None  # None for ad-hoc config-defined instances
    box: dict  # coord name -> (lo, hi)
    convention: str | None = None


@dataclass(frozen=True)
class Family:
    id: str
    description: str
    source: str  # where the family comes from, in words
    schema: tuple
    build: object = field(compare=False)  # callable(bound params) -> FamilyInstance


# -- template helpers ------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def _p(text: str, coords, params=()) -> Expr:
    return exprdsl.parse(text, coords, params)


def _parse_fn(spec_text: str, var: str, name: str) -> Expr:
    """Parse a function-slot expression and check it uses only its variable."""
    try:
        ast = exprdsl.parse(spec_text, [var], [])
    except Exception as exc:
        raise FamilyError(f"bad expression for slot {name!r}: {exc}") from exc
    return ast


def _sub_str(ast: Expr) -> str:
    return "(" + exprdsl.serialize(ast) + ")"


def _grid_values(ast: Expr, var: str, lo: float, hi: float, n: int = 61):
    return [
        exprdsl.eval_value(ast, {var: lo + (hi - lo) * i / (n - 1)}, {})
        for i in range(n)
    ]


def _brinkmann_metric(f_str: str, coords=("u", "v", "x"), constraints=(),
                      w_str=None, guv="1") -> MetricSpec:
    cs = tuple(_p(c, coords) for c in constraints)
    chart = Chart(tuple(coords), cs)
    comps = {
        (0, 1): _p(guv, coords),
        (1, 1): _p(f_str, coords),
    }
    if w_str is not None:
        comps[(1, 2)] = _p(w_str, coords)
    for i in range(2, len(coords)):
        comps[(i, i)] = _p("1", coords)
    return MetricSpec(chart, comps)


# -- family builders -------------------------------------------------------


def _build_plane_wave_3d(params):
    alpha = _parse_fn(params["alpha"], "v", "alpha")
    box = {"u": (-2.0, 2.0), "v": (0.3, 2.8), "x": (-2.0, 2.0)}
    app = diff(diff(alpha, "v"), "v")
    vals = _grid_values(app, "v", *box["v"])
    if max(abs(v) for v in vals) < 1e-8:
        raise FamilyPreconditionError(
            "plane-wave-3d needs a profile with nonvanishing second "
            "derivative on the sampled range; alpha'' is identically ~0"
        )
    avals = _grid_values(alpha, "v", *box["v"])
    if min(avals) <= 0:
        raise FamilyPreconditionError("plane-wave-3d profile must stay positive")
    f = f"-({_sub_str(app)}/{_sub_str(alpha)})*x^2"
    metric = _brinkmann_metric(f)
    density = DensitySpec(metric.chart, _p(params["alpha"], ("u", "v", "x")))
    return FamilyInstance(
        "plane-wave-3d", params, metric, density, 0.0,
        Tags(isotropic=True, nilpotency=2, tau=0.0, family_class="plane-wave"),
        box,
    )


def _build_pp_wave_spacelike(params):
    g1 = float(params["gamma1"])
    if g1 == 0.0:
        raise FamilyError("pp-wave-spacelike requires gamma1 != 0")
    gamma0 = _parse_fn(params["gamma0"], "v", "gamma0")
    alpha = _parse_fn(params["alpha"], "v", "alpha")
    beta = _parse_fn(params["beta"], "v", "beta")
    g0pp = diff(diff(gamma0, "v"), "v")
    box = {"u": (-1.0, 1.0), "v": (0.2, 1.5), "x": (0.2, 1.5)}
    disc = [
        g1 * a + 2.0 * g0 * gpp
        for a, g0, gpp in zip(
            _grid_values(alpha, "v", *box["v"]),
            _grid_values(gamma0, "v", *box["v"]),
            _grid_values(g0pp, "v", *box["v"]),
        )
    ]
    if min(abs(d) for d in disc) < 1e-8:
        raise FamilyPreconditionError(
            "pp-wave-spacelike needs gamma1*alpha + 2*gamma0*gamma0'' "
            "nonzero on the sampled range"
        )
    coords = ("u", "v", "x")
    a, g0s, gpp, b = (_sub_str(t) for t in (alpha, gamma0, g0pp, beta))
    harg = f"({g0s} + {_fmt(g1)}*x)"
    f = (
        f"(({_fmt(g1)}*{a} + 2*{g0s}*{gpp})*log{harg})/{_fmt(g1 * g1)}"
        f" - (2*x*{gpp})/{_fmt(g1)} + {b}"
    )
    metric = _brinkmann_metric(f, coords, constraints=(f"{g0s} + {_fmt(g1)}*x",))
    density = DensitySpec(metric.chart, _p(f"{_fmt(g1)}*x + {g0s}", coords))
    return FamilyInstance(
        "pp-wave-spacelike", params, metric, density, 0.0,
        Tags(isotropic=False, nilpotency=2, tau=0.0, family_class="pp-wave"),
        box,
    )


def kundt_metric(params, convention: str = DEFAULT_KUNDT_CONVENTION) -> MetricSpec:
    """The 3-dimensional Kundt solution metric for the chosen cross-term
    convention; split out so both conventions can be compared."""
    if convention not in KUNDT_CONVENTIONS:
        raise FamilyError(f"unknown Kundt convention {convention!r}")
    a1 = _sub_str(_parse_fn(params["alpha1"], "v", "alpha1"))
    a2 = _sub_str(_parse_fn(params["alpha2"], "v", "alpha2"))
    a3 = _sub_str(_parse_fn(params["alpha3"], "v", "alpha3"))
    gamma1 = f"({a1} - 2*log(x)/v)"
    gamma0 = (
        f"(x^2*((log(x)-2)*log(x)+2)/v^2 + x^2*{a1}*(1-log(x))/v"
        f" + x^2*{a2} + x*{a3})"
    )
    f = f"u^2/x^2 + {gamma1}*u + {gamma0}"
    guv = "1" if convention == "2du" else "1/2"
    return _brinkmann_metric(
        f, ("u", "v", "x"), constraints=("x", "v"), w_str="-2*u/x", guv=guv
    )


def _build_kundt_3d(params):
    metric = kundt_metric(params, DEFAULT_KUNDT_CONVENTION)
    density = DensitySpec(metric.chart, _p("v", ("u", "v", "x")))
    return FamilyInstance(
        "kundt-3d", params, metric, density, 0.0,
        Tags(isotropic=True, nilpotency=3, tau=0.0, family_class="Kundt"),
        {"u": (0.2, 2.0), "v": (0.2, 2.0), "x": (0.2, 2.0)},
        convention=DEFAULT_KUNDT_CONVENTION,
    )


def _build_space_form_density(params, anti: bool):
    kappa = float(params["kappa"])
    if kappa <= 0.0:
        raise FamilyError("kappa must be positive")
    lam = float(params["Lambda"])
    coords = ("x", "y", "z")
    pnames = ("kappa", "Lambda", "c1", "c2")
    if anti:
        comps = {
            (0, 0): _p("-(kappa^2)*cosh(y)^2", coords, pnames),
            (1, 1): _p("kappa^2", coords, pnames),
            (2, 2): _p("kappa^2*sinh(y)^2", coords, pnames),
        }
        h = "kappa^2*Lambda/2 + sinh(y)*(c1*cos(z) + c2*sin(z))"
        tau = -6.0 / kappa**2
        fid = "ads-density"
        box = {"x": (-1.0, 1.0), "y": (0.3, 1.2), "z": (-0.5, 0.5)}
    else:
        comps = {
            (0, 0): _p("-(kappa^2)*cos(y)^2", coords, pnames),
            (1, 1): _p("kappa^2", coords, pnames),
            (2, 2): _p("kappa^2*sin(y)^2", coords, pnames),
        }
        h = "-(kappa^2)*Lambda/2 + sin(y)*(c1*cos(z) + c2*sin(z))"
        tau = 6.0 / kappa**2
        fid = "ds-density"
        box = {"x": (-1.0, 1.0), "y": (0.5, 1.4), "z": (-0.5, 0.5)}
    hexpr = _p(h, coords, pnames)
    chart = Chart(coords, (hexpr,))  # sampling keeps the density positive
    metric = MetricSpec(chart, comps)
    return FamilyInstance(
        fid, params, metric, DensitySpec(chart, hexpr), lam,
        Tags(isotropic=False, nilpotency=0, tau=tau,
             family_class="Einstein-background"),
        box,
    )


def _build_pc_family(params):
    c = float(params["c"])
    if c <= 0.0:
        raise FamilyError(
            "pc-family requires c > 0 (the shipped sampling box has v > 0)"
        )
    a1, a2 = float(params["a1"]), float(params["a2"])
    if a1 < 0 or a2 < 0 or a1 + a2 == 0:
        raise FamilyError("pc-family requires a1, a2 >= 0 and not both zero")
    root = math.sqrt(c * c + 16.0)
    p1 = (c - root) / (2.0 * c)
    p2 = (c + root) / (2.0 * c)
    coords = ("u", "v", "x")
    f = f"-(4/{_fmt(c * c)})*x^2/v^2"
    metric = _brinkmann_metric(f, coords, constraints=("v",))
    h = (
        f"{_fmt(a1)}*({_fmt(c)}*v)^({_fmt(p1)})"
        f" + {_fmt(a2)}*({_fmt(c)}*v)^({_fmt(p2)})"
    )
    density = DensitySpec(metric.chart, _p(h, coords))
    return FamilyInstance(
        "pc-family", params, metric, density, 0.0,
        Tags(isotropic=True, nilpotency=2, tau=0.0, family_class="plane-wave"),
        {"u": (-1.0, 1.0), "v": (0.3, 2.0), "x": (-2.0, 2.0)},
    )


def cahen_wallach_profile(epsilon: float, c1: float, c2: float) -> str:
    """The density profile paired with the symmetric plane wave of
    curvature parameter epsilon: exponential for epsilon > 0,
    trigonometric for epsilon < 0."""
    if epsilon > 0:
        s = _fmt(math.sqrt(epsilon))
        return f"{_fmt(c1)}*exp(v*{s}) + {_fmt(c2)}*exp(-(v*{s}))"
    s = _fmt(math.sqrt(-epsilon))
    return f"{_fmt(c1)}*cos(v*{s}) + {_fmt(c2)}*sin(v*{s})"


def _build_cahen_wallach(params):
    eps = float(params["epsilon"])
    if eps == 0.0:
        raise FamilyError("cahen-wallach requires epsilon != 0")
    coords = ("u", "v", "x")
    # profile second derivative is -epsilon * profile, so the solution
    # profile pairs with g_vv = -epsilon x^2
    metric = _brinkmann_metric(f"-({_fmt(eps)})*x^2", coords)
    h = cahen_wallach_profile(eps, float(params["b1"]), float(params["b2"]))
    hexpr = _p(h, coords)
    box = {"u": (-2.0, 2.0), "v": (0.2, 1.3), "x": (-2.0, 2.0)}
    lo, hi = box["v"]
    vals = [
        exprdsl.eval_value(hexpr, {"u": 0.0, "v": lo + t * (hi - lo) / 60, "x": 0.0}, {})
        for t in range(61)
    ]
    if min(vals) <= 0:
        raise FamilyPreconditionError(
            "cahen-wallach density profile must stay positive on the box"
        )
    chart = metric.chart
    return FamilyInstance(
        "cahen-wallach", params, metric, DensitySpec(chart, hexpr), 0.0,
        Tags(isotropic=True, nilpotency=2, tau=0.0, family_class="plane-wave"),
        box,
    )


def _build_brinkmann_nonisotropic(params):
    coords = ("u", "v", "x")
    f = "((4*u*v - x^2)*log(v*x) + x^2)/(2*v^2)"
    metric = _brinkmann_metric(f, coords, constraints=("v", "x"))
    density = DensitySpec(metric.chart, _p("v*x", coords))
    return FamilyInstance(
        "brinkmann-nonisotropic", params, metric, density, 0.0,
        Tags(isotropic=False, nilpotency=3, tau=0.0, family_class="Brinkmann"),
        {"u": (0.2, 1.8), "v": (0.2, 1.8), "x": (0.2, 1.8)},
    )


def _build_tau_positive(params):
    kappa = float(params["kappa"])
    if kappa <= 0.0:
        raise FamilyError("tau-positive requires kappa > 0")
    alpha = _sub_str(_parse_fn(params["alpha"], "v", "alpha"))
    coords = ("u", "v", "x")
    pn = ("kappa",)
    f = (
        f"u^2*kappa/2 + {alpha}*(u + 2*sqrt(2/kappa)"
        f"*arctanh(tan(x*sqrt(kappa)/(2*sqrt(2)))))"
    )
    chart = Chart(coords)
    metric = MetricSpec(chart, {
        (0, 1): _p("1", coords, pn),
        (1, 1): _p(f, coords, pn),
        (2, 2): _p("1", coords, pn),
    })
    density = DensitySpec(chart, _p("cos(x*sqrt(kappa/2))", coords, pn))
    # keep the tan argument in a window safely inside (-pi/2, pi/2) and
    # the arctanh argument inside (-1, 1)
    lo = 0.05 * 2.0 * math.sqrt(2.0) / math.sqrt(kappa)
    hi = 0.6 * 2.0 * math.sqrt(2.0) / math.sqrt(kappa)
    return FamilyInstance(
        "tau-positive", params, metric, density, 0.0,
        Tags(isotropic=False, nilpotency=0, tau=kappa, family_class="Brinkmann"),
        {"u": (-1.0, 1.0), "v": (0.2, 2.0), "x": (lo, hi)},
    )


def _build_tau_negative(params):
    kappa = float(params["kappa"])
    if kappa >= 0.0:
        raise FamilyError("tau-negative requires kappa < 0")
    alpha = _sub_str(_parse_fn(params["alpha"], "v", "alpha"))
    coords = ("u", "v", "x")
    pn = ("kappa",)
    f = (
        f"u^2*kappa/2 + sqrt(2/(-kappa))*{alpha}"
        f"*exp(-(x*sqrt(-kappa)/sqrt(2)))"
    )
    chart = Chart(coords)
    metric = MetricSpec(chart, {
        (0, 1): _p("1", coords, pn),
        (1, 1): _p(f, coords, pn),
        (2, 2): _p("1", coords, pn),
    })
    density = DensitySpec(chart, _p("exp(sqrt(-kappa/2)*x)", coords, pn))
    return FamilyInstance(
        "tau-negative", params, metric, density, 0.0,
        Tags(isotropic=False, nilpotency=0, tau=kappa, family_class="Brinkmann"),
        {"u": (-1.0, 1.0), "v": (0.2, 2.0), "x": (-1.0, 1.0)},
    )


def _build_brinkmann_4d_nonpp(params):
    coords = ("u", "v", "x1", "x2")
    chart = Chart(coords, (_p("v", coords),))
    # the printed g_vv contains a cancelling pair of u-terms; the stored
    # form is the simplified -x1*u
    gvv = (
        "-(x1*u) + (-(2*v^2*x1^3*x2) - v*x1^4 + 3*v*x1^2*x2^2"
        " + 12*v*x1^2*x2 + x1^3)/(6*v)"
    )
    metric = MetricSpec(chart, {
        (0, 1): _p("1", coords),
        (1, 1): _p(gvv, coords),
        (1, 3): _p("x1*x2 + v*x2^2", coords),
        (2, 2): _p("1", coords),
        (3, 3): _p("1", coords),
    })
    density = DensitySpec(chart, _p("v", coords))
    return FamilyInstance(
        "brinkmann-4d-nonpp", params, metric, density, 0.0,
        Tags(isotropic=True, nilpotency=2, tau=0.0, family_class="Brinkmann"),
        {"u": (0.2, 1.5), "v": (0.3, 1.5), "x1": (0.2, 1.5), "x2": (0.2, 1.5)},
    )


def _build_pp_wave_nd_ricciflat(params):
    coords = ("u", "v", "x1", "x2")
    try:
        fexpr = exprdsl.parse(params["F"], ["x1", "x2"], [])
    except Exception as exc:
        raise FamilyError(f"bad expression for slot 'F': {exc}") from exc
    # the family asserts Ricci-flatness, which needs a transversally
    # harmonic profile; reject a profile that visibly is not
    lap = BinOp("+", diff(diff(fexpr, "x1"), "x1"), diff(diff(fexpr, "x2"), "x2"))
    worst = 0.0
    for x1 in (-1.5, -0.5, 0.5, 1.5):
        for x2 in (-1.5, -0.5, 0.5, 1.5):
            worst = max(worst, abs(exprdsl.eval_value(lap, {"x1": x1, "x2": x2}, {})))
    if worst > 1e-8:
        raise FamilyPreconditionError(
            "pp-wave-nd-ricciflat requires a transversally harmonic profile"
        )
    chart = Chart(coords, (_p("v", coords),))
    metric = MetricSpec(chart, {
        (0, 1): _p("1", coords),
        (1, 1): exprdsl.parse(params["F"], coords, []),
        (2, 2): _p("1", coords),
        (3, 3): _p("1", coords),
    })
    density = DensitySpec(chart, _p("v", coords))
    return FamilyInstance(
        "pp-wave-nd-ricciflat", params, metric, density, 0.0,
        Tags(isotropic=True, nilpotency=1, tau=0.0, family_class="pp-wave"),
        {"u": (-2.0, 2.0), "v": (0.2, 2.0), "x1": (-2.0, 2.0), "x2": (-2.0, 2.0)},
    )


def _warp(base: FamilyInstance, warp_expr: Expr, fid: str) -> FamilyInstance:
    warp = DensitySpec(base.metric.chart, warp_expr)
    metric = warped_product(base.metric, warp)
    # the warped metrics are plain Ricci-flat spacetimes; the weighted
    # equation with unit density reduces to the vacuum Einstein equation
    density = DensitySpec(metric.chart, Num(1.0))
    box = dict(base.box)
    box["t"] = (-1.0, 1.0)
    return FamilyInstance(
        fid, base.params, metric, density, 0.0,
        Tags(isotropic=False, nilpotency=1, tau=0.0, family_class="warped-product"),
        box, convention=base.convention,
    )


def _build_warped_m1(params):
    base = _build_plane_wave_3d(params)
    return _warp(base, base.density.expr, "warped-M1")


def _build_warped_m2(params):
    base = _build_pp_wave_spacelike(params)
    return _warp(base, base.density.expr, "warped-M2")


def _build_warped_m3(params):
    base = _build_kundt_3d(params)
    return _warp(base, base.density.expr, "warped-M3")


# -- registry --------------------------------------------------------------

_PROFILE = FnParam("alpha", "v", "2+sin(v)", "wave profile")

FAMILIES: tuple[Family, ...] = (
    Family(
        "plane-wave-3d",
        "3-dim plane wave solving the weighted vacuum equation for an "
        "arbitrary positive profile alpha(v) with alpha'' != 0",
        "isotropic solution with 2-step nilpotent Ricci operator",
        (_PROFILE,),
        _build_plane_wave_3d,
    ),
    Family(
        "pp-wave-spacelike",
        "3-dim pp-wave solution with spacelike density gradient "
        "h = gamma1*x + gamma0(v)",
        "non-isotropic pp-wave solution branch",
        (
            RealParam("gamma1", 1.0, "constant slope of the density"),
            FnParam("gamma0", "v", "2+v^2", "density profile"),
            _PROFILE,
            FnParam("beta", "v", "0", "free additive profile"),
        ),
        _build_pp_wave_spacelike,
    ),
    Family(
        "kundt-3d",
        "3-dim Kundt solution with h = v, F = u^2/x^2 + gamma1*u + gamma0 "
        "and W = -2u/x, for free functions alpha1, alpha2, alpha3 of v",
        "isotropic solution with 3-step nilpotent Ricci operator",
        (
            FnParam("alpha1", "v", "0"),
            FnParam("alpha2", "v", "0"),
            FnParam("alpha3", "v", "0"),
        ),
        _build_kundt_3d,
    ),
    Family(
        "ds-density",
        "de Sitter background of radius kappa with a density solving the "
        "weighted vacuum equation for arbitrary cosmological constant",
        "Einstein background, spacelike-or-lightlike density gradient",
        (
            RealParam("kappa", 1.0),
            RealParam("Lambda", 0.5),
            RealParam("c1", 1.0),
            RealParam("c2", 0.0),
        ),
        lambda p: _build_space_form_density(p, anti=False),
    ),
    Family(
        "ads-density",
        "anti-de Sitter background of radius kappa with a density solving "
        "the weighted vacuum equation for arbitrary cosmological constant",
        "Einstein background, spacelike density gradient",
        (
            RealParam("kappa", 1.0),
            RealParam("Lambda", 0.5),
            RealParam("c1", 1.0),
            RealParam("c2", 0.0),
        ),
        lambda p: _build_space_form_density(p, anti=True),
    ),
    Family(
        "pc-family",
        "locally homogeneous plane-wave solutions with inverse-square "
        "profile -4/(c^2 v^2) x^2 and power-law density",
        "homogeneous plane-wave branch (null singularity at v = 0)",
        (RealParam("c", 1.0), RealParam("a1", 1.0), RealParam("a2", 1.0)),
        _build_pc_family,
    ),
    Family(
        "cahen-wallach",
        "symmetric plane-wave (Cahen-Wallach) solutions; epsilon > 0 pairs "
        "with exponential densities, epsilon < 0 with trigonometric ones",
        "geodesically complete homogeneous plane-wave branch",
        (
            RealParam("epsilon", 1.0),
            RealParam("b1", 1.0),
            RealParam("b2", 1.0),
        ),
        _build_cahen_wallach,
    ),
    Family(
        "brinkmann-nonisotropic",
        "3-dim Brinkmann wave with h = v*x: a non-isotropic solution whose "
        "Ricci operator is 3-step nilpotent (so not a pp-wave)",
        "non-isotropic Brinkmann example with spacelike gradient",
        (),
        _build_brinkmann_nonisotropic,
    ),
    Family(
        "tau-positive",
        "Brinkmann solution with constant scalar curvature tau = kappa > 0 "
        "and spacelike density gradient",
        "realizes arbitrary positive constant scalar curvature",
        (RealParam("kappa", 1.0), _PROFILE),
        _build_tau_positive,
    ),
    Family(
        "tau-negative",
        "Brinkmann solution with constant scalar curvature tau = kappa < 0 "
        "and spacelike density gradient",
        "realizes arbitrary negative constant scalar curvature",
        (RealParam("kappa", -1.0), _PROFILE),
        _build_tau_negative,
    ),
    Family(
        "brinkmann-4d-nonpp",
        "4-dim isotropic solution on a Brinkmann wave that is not a "
        "pp-wave despite a 2-step nilpotent Ricci operator",
        "shows the 3-dim plane-wave rigidity fails in dimension 4",
        (),
        _build_brinkmann_4d_nonpp,
    ),
    Family(
        "pp-wave-nd-ricciflat",
        "4-dim Ricci-flat pp-wave with transversally harmonic profile and "
        "h = v (parallel density gradient)",
        "Ricci-flat isotropic branch",
        (FnParam("F", "x1,x2", "x1^2 - x2^2", "transverse wave profile"),),
        _build_pp_wave_nd_ricciflat,
    ),
    Family(
        "warped-M1",
        "4-dim Ricci-flat warped product of the 3-dim plane-wave solution "
        "with warping function alpha(v); a plane wave of type N",
        "warped-product construction over plane-wave-3d",
        (_PROFILE,),
        _build_warped_m1,
    ),
    Family(
        "warped-M2",
        "4-dim Ricci-flat warped product of the spacelike pp-wave solution "
        "with warping function gamma1*x + gamma0(v); type N",
        "warped-product construction over pp-wave-spacelike",
        (
            RealParam("gamma1", 1.0),
            FnParam("gamma0", "v", "2+v^2"),
            _PROFILE,
            FnParam("beta", "v", "0"),
        ),
        _build_warped_m2,
    ),
    Family(
        "warped-M3",
        "4-dim Ricci-flat Kundt warped product of the 3-dim Kundt solution "
        "with warping function v; type III",
        "warped-product construction over kundt-3d",
        (
            FnParam("alpha1", "v", "0"),
            FnParam("alpha2", "v", "0"),
            FnParam("alpha3", "v", "0"),
        ),
        _build_warped_m3,
    ),
)

_BY_ID = {f.id: f for f in FAMILIES}


def list_families():
    """Stable roster of (id, description, source)."""
    return [(f.id, f.description, f.source) for f in FAMILIES]


def get_family(family_id: str) -> Family:
    try:
        return _BY_ID[family_id]
    except KeyError:
        raise FamilyError(f"unknown family {family_id!r}") from None


def instantiate(family_id: str, params: dict | None = None) -> FamilyInstance:
    """Bind parameters (falling back to defaults) and build the family."""
    fam = get_family(family_id)
    schema = {s.name: s for s in fam.schema}
    bound = {}
    for name, s in schema.items():
        bound[name] = s.default
    for name, value in (params or {}).items():
        if name not in schema:
            raise FamilyError(
                f"family {family_id!r} has no parameter {name!r} "
                f"(expected one of {sorted(schema)})"
            )
        s = schema[name]
        if isinstance(s, RealParam):
            try:
                bound[name] = float(value)
            except (TypeError, ValueError):
                raise FamilyError(
                    f"parameter {name!r} of {family_id!r} must be a real number"
                ) from None
        else:
            bound[name] = str(value)
    return fam.build(bound)


def sample_points(instance: FamilyInstance, count: int, seed: int,
                  margin: float = DOMAIN_MARGIN) -> list[dict]:
    """Deterministic uniform samples in the family box, rejecting points
    that violate the domain constraints by less than the margin."""
    if count < 1:
        raise FamilyError("count must be >= 1")
    rng = np.random.default_rng(seed)
    coords = instance.metric.chart.coords
    lows = np.array([instance.box[c][0] for c in coords])
    highs = np.array([instance.box[c][1] for c in coords])
    real_params = {
        k: v for k, v in instance.params.items() if isinstance(v, float)
    }
    points = []
    attempts = 0
    cap = 100 * count
    while len(points) < count:
        if attempts >= cap:
            raise SamplingError(
                f"rejection sampling for {instance.family_id} exceeded "
                f"{cap} attempts; box and constraints are inconsistent"
            )
        attempts += 1
        draw = rng.uniform(lows, highs)
        point = {c: float(x) for c, x in zip(coords, draw)}
        try:
            instance.metric.chart.check_point(point, real_params, margin)
        except Exception:
            continue
        points.append(point)
    return points
