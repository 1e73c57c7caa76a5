"""Reproducible model configurations.

Every scenario is a pure function of its arguments (including the seed), so
running it twice gives bit-identical trajectories.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dynamics import EnvironmentTerm, GrowthSystem, Trajectory, integrate, is_irreducible
from .errors import InputError
from .spatial import SpatialLayout, build_lattice

# monthly endogenous rates of the six education groups, and their all-to-all transfer rate
SIX_GROUP_RATES = (-0.15, -0.1, -0.05, 0.0, 0.025, 0.05)
SIX_GROUP_COUPLING = 0.4


@dataclass(frozen=True)
class Scenario:
    name: str
    system: GrowthSystem
    w0: np.ndarray
    t_end: float
    dt: float
    seed: int | None = None
    layout: SpatialLayout | None = None
    centers: tuple[int, ...] = ()
    threshold: float = 0.01
    params: dict = field(default_factory=dict)

    def run(self, t_end: float | None = None, dt: float | None = None) -> Trajectory:
        return integrate(self.system, self.w0,
                         self.t_end if t_end is None else t_end,
                         self.dt if dt is None else dt)


def paper_six_group(t_end: float = 72.0, dt: float = 0.25) -> Scenario:
    """Six all-to-all coupled groups, uniform start W = 1, no environment term."""
    n = len(SIX_GROUP_RATES)
    coupling = np.full((n, n), SIX_GROUP_COUPLING)
    np.fill_diagonal(coupling, 0.0)
    system = GrowthSystem(np.array(SIX_GROUP_RATES), coupling, EnvironmentTerm.zero())
    return Scenario("paper_six_group", system, np.ones(n), t_end, dt,
                    params={"t_end": t_end, "dt": dt})


def lattice_growth_center(rows: int = 20, cols: int = 20, n_centers: int = 3,
                          a_center: float = 0.05, a_background: float = -0.05,
                          coupling: float = 0.01, seed: int = 0, spacing_km: float = 10.0,
                          t_end: float = 1200.0, dt: float = 1.0,
                          w_lo: float = 0.002, w_hi: float = 0.006) -> Scenario:
    """Grid of units with a few randomly placed growth centers.

    Starting levels are i.i.d. uniform on [w_lo, w_hi], below the default
    crossing threshold of 0.01, so the crossing map traces the spread of growth.
    """
    n = rows * cols
    if n_centers < 1 or n_centers > n:
        raise InputError(f"need 1 <= n_centers <= {n}, got {n_centers}")
    if not a_center > 0 > a_background:
        warnings.warn("growth centers are expected to have a_center > 0 > a_background", stacklevel=2)
    layout, c = build_lattice(rows, cols, spacing_km, coupling)
    rng = np.random.default_rng(seed)
    centers = tuple(sorted(int(i) for i in rng.choice(n, n_centers, replace=False)))
    w0 = rng.uniform(w_lo, w_hi, size=n)
    a = np.full(n, float(a_background))
    a[list(centers)] = a_center
    system = GrowthSystem(a, c, EnvironmentTerm.zero(), allow_reducible=(coupling == 0 and n > 1))
    params = dict(rows=rows, cols=cols, n_centers=n_centers, a_center=a_center,
                  a_background=a_background, coupling=coupling, seed=seed, spacing_km=spacing_km,
                  t_end=t_end, dt=dt, w_lo=w_lo, w_hi=w_hi)
    return Scenario("lattice_growth_center", system, w0, t_end, dt, seed, layout, centers,
                    params=params)


def random_system(n: int, seed: int | None = 0, a_range: tuple[float, float] = (-0.2, 0.2),
                  coupling_range: tuple[float, float] = (0.0, 0.2), density: float = 1.0,
                  symmetric: bool = False, env: EnvironmentTerm | None = None,
                  max_retries: int = 100) -> GrowthSystem:
    """Seeded irreducible system; off-diagonal links are present with probability ``density``.

    Draws are repeated (from the same generator) until the coupling graph is
    strongly connected.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        a = rng.uniform(*a_range, size=n)
        c = rng.uniform(*coupling_range, size=(n, n))
        c *= rng.random((n, n)) < density
        if symmetric:
            c = np.triu(c, 1)
            c = c + c.T
        np.fill_diagonal(c, 0.0)
        if is_irreducible(c):
            return GrowthSystem(a, c, env or EnvironmentTerm.zero())
    raise InputError(f"no irreducible draw in {max_retries} attempts (n={n}, density={density})")


def j_curve_system(n: int, seed: int | None = 0) -> GrowthSystem:
    """Random symmetric system with mean(a) < 0 < max(a) and a positive common rate.

    One unit gets a_max in [0.03, 0.08]; the rest lie at least 0.04 below it.
    Each link is at most a_max / (2 (n - 1)), so the growth center keeps
    a~_max >= a_max / 2 > 0 and the dominant eigenvalue, which exceeds a~_max,
    is positive.
    """
    if n < 2:
        raise InputError("a J-curve needs at least two units")
    rng = np.random.default_rng(seed)
    a_max = rng.uniform(0.03, 0.08)
    while True:
        rest = rng.uniform(-0.2, a_max - 0.04, size=n - 1)
        a = np.concatenate([[a_max], rest])
        if a.mean() < 0:
            break
    a = rng.permutation(a)
    c = np.triu(rng.uniform(0.0, a_max / (2 * (n - 1)), size=(n, n)), 1)
    c = c + c.T
    return GrowthSystem(a, c, EnvironmentTerm.zero())


def random_scenario(n: int = 8, seed: int = 0, t_end: float = 100.0, dt: float = 0.1,
                    w_lo: float = 0.5, w_hi: float = 1.5) -> Scenario:
    system = random_system(n, seed)
    w0 = np.random.default_rng([seed, 1]).uniform(w_lo, w_hi, size=n)
    return Scenario("random_system", system, w0, t_end, dt, seed,
                    params=dict(n=n, seed=seed, t_end=t_end, dt=dt, w_lo=w_lo, w_hi=w_hi))


def j_curve_scenario(n: int = 6, seed: int = 0, t_end: float = 600.0, dt: float = 0.5) -> Scenario:
    system = j_curve_system(n, seed)
    return Scenario("j_curve", system, np.ones(n), t_end, dt, seed,
                    params=dict(n=n, seed=seed, t_end=t_end, dt=dt))


def correlated_pair(n: int, r: float, seed: int | None = 0) -> tuple[np.ndarray, np.ndarray]:
    """Two standardised vectors whose sample correlation is exactly ``r``."""
    if n < 3 or not -1 < r < 1:
        raise InputError("need n >= 3 and -1 < r < 1")
    g = np.random.default_rng(seed).standard_normal((2, n))
    g -= g.mean(axis=1, keepdims=True)
    u = g[0] / np.linalg.norm(g[0])
    v = g[1] - np.dot(g[1], u) * u
    v /= np.linalg.norm(v)
    scale = np.sqrt(n)
    return u * scale, (r * u + np.sqrt(1 - r * r) * v) * scale


def education_scenario(rows: int = 10, cols: int = 10, seed: int = 0,
                       education_density_corr: float = 0.357, a_mean: float = -0.03,
                       a_per_year: float = 0.03, coupling: float = 0.005,
                       t_end: float = 72.0, dt: float = 0.5) -> tuple[Scenario, np.ndarray, np.ndarray]:
    """Lattice whose endogenous rates rise with a synthetic education level.

    Education (years) and population density are drawn with the given exact
    sample correlation; a_i = a_mean + a_per_year * (education_i - mean).
    Starting activity is uniform random and unrelated to either attribute, so
    activity-education correlation starts near zero and builds up over time.
    """
    n = rows * cols
    z_edu, z_dens = correlated_pair(n, education_density_corr, seed)
    education = 9.0 + 1.0 * z_edu
    density = 150.0 + 30.0 * z_dens
    layout, c = build_lattice(rows, cols, 10.0, coupling)
    a = a_mean + a_per_year * (education - education.mean())
    system = GrowthSystem(a, c, EnvironmentTerm.zero())
    w0 = np.random.default_rng([seed, 2]).uniform(0.005, 0.015, size=n)
    params = dict(rows=rows, cols=cols, seed=seed, education_density_corr=education_density_corr,
                  a_mean=a_mean, a_per_year=a_per_year, coupling=coupling, t_end=t_end, dt=dt)
    scenario = Scenario("education", system, w0, t_end, dt, seed, layout, params=params)
    return scenario, education, density


SCENARIOS = {
    "paper_six_group": paper_six_group,
    "lattice_growth_center": lattice_growth_center,
    "random_system": random_scenario,
    "j_curve": j_curve_scenario,
}


def get_scenario(name: str, **overrides) -> Scenario:
    key = name.replace("-", "_")
    if key not in SCENARIOS:
        raise InputError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    return SCENARIOS[key](**overrides)
