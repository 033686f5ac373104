"""Config file loading and export.

A config is a TOML document describing one metric measure structure:

    [chart]
    coords = ["u", "v", "x"]
    constraints = ["v", "x"]          # optional, each must stay > 0

    [metric]                          # upper-triangle components, 0-based
    "0,1" = "1"
    "1,1" = "u^2/x^2"

    [density]                         # optional
    expr = "v"

    [run]                             # optional
    lambda = 0.0
    mu = 1.0

    [params]                          # optional named real constants
    kappa = 1.0

    [sampling]                        # optional per-coordinate boxes
    u = [0.2, 2.0]

Catalog families can be exported to this format so users can derive
variants without touching code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import tomli

from . import exprdsl
from .errors import ConfigError
from .tensorcore import Chart, DensitySpec, MetricSpec


@dataclass
class MetricConfig:
    metric: MetricSpec
    density: DensitySpec | None
    lam: float
    mu: float
    params: dict = field(default_factory=dict)
    box: dict = field(default_factory=dict)  # coord -> (lo, hi)


def _parse_component_key(key: str, dim: int):
    parts = key.split(",")
    if len(parts) != 2:
        raise ConfigError(f"metric component key {key!r} is not 'i,j'")
    try:
        i, j = int(parts[0]), int(parts[1])
    except ValueError:
        raise ConfigError(f"metric component key {key!r} is not 'i,j'") from None
    if not (0 <= i < dim and 0 <= j < dim):
        raise ConfigError(f"metric component {key!r} out of range for dim {dim}")
    if i > j:
        i, j = j, i
    return i, j


def load_config(path: str) -> MetricConfig:
    """Read and validate a metric config file."""
    try:
        with open(path, "rb") as fh:
            doc = tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid: {exc}") from None
    return parse_config(doc)


def parse_config(doc: dict) -> MetricConfig:
    chart_tab = doc.get("chart")
    if not isinstance(chart_tab, dict) or "coords" not in chart_tab:
        raise ConfigError("config needs a [chart] table with a coords list")
    coords = chart_tab["coords"]
    if (
        not isinstance(coords, list)
        or not coords
        or not all(isinstance(c, str) for c in coords)
    ):
        raise ConfigError("chart.coords must be a nonempty list of names")
    coords = tuple(coords)

    params_tab = doc.get("params", {})
    if not isinstance(params_tab, dict):
        raise ConfigError("[params] must be a table of real constants")
    params = {}
    for name, value in params_tab.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"parameter {name!r} must be a real number")
        params[name] = float(value)
    pnames = tuple(params)

    def parse_expr(text, where):
        if not isinstance(text, str):
            raise ConfigError(f"{where} must be an expression string")
        try:
            return exprdsl.parse(text, coords, pnames)
        except Exception as exc:
            raise ConfigError(f"bad expression in {where}: {exc}") from exc

    constraints = tuple(
        parse_expr(c, "chart.constraints")
        for c in chart_tab.get("constraints", [])
    )
    chart = Chart(coords, constraints)

    metric_tab = doc.get("metric")
    if not isinstance(metric_tab, dict) or not metric_tab:
        raise ConfigError("config needs a nonempty [metric] table")
    components = {}
    for key, text in metric_tab.items():
        ij = _parse_component_key(key, chart.dim)
        if ij in components:
            raise ConfigError(f"metric component {key!r} given twice")
        components[ij] = parse_expr(text, f"metric.{key}")
    metric = MetricSpec(chart, components)

    density = None
    if "density" in doc:
        dtab = doc["density"]
        if not isinstance(dtab, dict) or "expr" not in dtab:
            raise ConfigError("[density] needs an expr key")
        density = DensitySpec(chart, parse_expr(dtab["expr"], "density.expr"))

    run = doc.get("run", {})
    if not isinstance(run, dict):
        raise ConfigError("[run] must be a table")
    lam = run.get("lambda", 0.0)
    mu = run.get("mu", 1.0)
    for name, value in (("lambda", lam), ("mu", mu)):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"run.{name} must be a real number")

    box = {}
    for coord, rng in doc.get("sampling", {}).items():
        if coord not in coords:
            raise ConfigError(f"sampling range for unknown coordinate {coord!r}")
        if (
            not isinstance(rng, list)
            or len(rng) != 2
            or not all(isinstance(v, (int, float)) for v in rng)
            or not rng[0] < rng[1]
        ):
            raise ConfigError(f"sampling.{coord} must be [lo, hi] with lo < hi")
        box[coord] = (float(rng[0]), float(rng[1]))

    return MetricConfig(metric, density, float(lam), float(mu), params, box)


# -- export ----------------------------------------------------------------


def _toml_string(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{out}"'


def _toml_value(v) -> str:
    if isinstance(v, str):
        return _toml_string(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize {type(v).__name__} to config text")


def _toml_key(k: str) -> str:
    if k and all(ch.isalnum() or ch in "-_" for ch in k):
        return k
    return _toml_string(k)


def dump_config(cfg: MetricConfig) -> str:
    """Render a MetricConfig back to config text (round-trips through
    load)."""
    chart = cfg.metric.chart
    lines = ["[chart]"]
    lines.append(f"coords = {_toml_value(list(chart.coords))}")
    if chart.constraints:
        cs = [exprdsl.serialize(c) for c in chart.constraints]
        lines.append(f"constraints = {_toml_value(cs)}")
    lines.append("")
    lines.append("[metric]")
    for (i, j), e in sorted(cfg.metric.components.items()):
        lines.append(f'"{i},{j}" = {_toml_value(exprdsl.serialize(e))}')
    if cfg.density is not None:
        lines.append("")
        lines.append("[density]")
        lines.append(f"expr = {_toml_value(exprdsl.serialize(cfg.density.expr))}")
    lines.append("")
    lines.append("[run]")
    lines.append(f"lambda = {_toml_value(cfg.lam)}")
    lines.append(f"mu = {_toml_value(cfg.mu)}")
    if cfg.params:
        lines.append("")
        lines.append("[params]")
        for name in sorted(cfg.params):
            lines.append(f"{_toml_key(name)} = {_toml_value(cfg.params[name])}")
    if cfg.box:
        lines.append("")
        lines.append("[sampling]")
        for coord in cfg.metric.chart.coords:
            if coord in cfg.box:
                lo, hi = cfg.box[coord]
                lines.append(f"{_toml_key(coord)} = {_toml_value([lo, hi])}")
    return "\n".join(lines) + "\n"


def config_from_instance(instance) -> MetricConfig:
    """Config view of a bound catalog family (fully bound expressions; the
    original real parameters are kept as named constants for reference)."""
    real = {k: v for k, v in instance.params.items() if isinstance(v, float)}
    return MetricConfig(
        instance.metric, instance.density, instance.lam, 1.0, real,
        dict(instance.box),
    )
