"""Shared helpers: randomized near-Minkowski metrics with polynomial
perturbations, used for identity and differentiation checks."""

import numpy as np

from wefe import exprdsl
from wefe.tensorcore import Chart, DensitySpec, MetricSpec

COORDS3 = ("t", "x", "y")


def random_polynomial(rng, coords, n_terms=3, amp=0.3, max_degree=3):
    """Expression text for a random polynomial with coefficients in
    [-amp, amp] and total degree at most max_degree."""
    terms = []
    for _ in range(n_terms):
        coeff = rng.uniform(-amp, amp)
        degree = int(rng.integers(1, max_degree + 1))
        factors = [str(rng.choice(coords)) for _ in range(degree)]
        terms.append(repr(coeff) + "*" + "*".join(factors))
    return " + ".join(terms) if terms else "0"


def perturbed_minkowski(seed, coords=COORDS3, amp=0.3, with_density=True):
    """Near-Minkowski metric on a chart: eta plus random polynomials of
    degree <= 3.  On the box [-0.5, 0.5]^n the perturbation stays small, so
    the metric is Lorentzian and well conditioned."""
    rng = np.random.default_rng(seed)
    chart = Chart(tuple(coords))
    n = chart.dim
    comps = {}
    for i in range(n):
        for j in range(i, n):
            base = "-1" if (i == j == 0) else ("1" if i == j else "0")
            poly = random_polynomial(rng, coords, amp=amp)
            comps[(i, j)] = exprdsl.parse(f"{base} + {poly}", coords)
    metric = MetricSpec(chart, comps)
    density = None
    if with_density:
        poly = random_polynomial(rng, coords, n_terms=2, amp=amp)
        density = DensitySpec(chart, exprdsl.parse(f"1.5 + {poly}", coords))
    return metric, density


def box_points(seed, coords=COORDS3, count=5, half_width=0.5):
    """Deterministic sample points in [-half_width, half_width]^n."""
    rng = np.random.default_rng(seed)
    return [
        {c: float(v) for c, v in zip(coords, rng.uniform(-half_width, half_width, len(coords)))}
        for _ in range(count)
    ]
