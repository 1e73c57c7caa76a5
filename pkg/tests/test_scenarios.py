import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from growthcenters.dynamics import is_irreducible
from growthcenters.errors import InputError
from growthcenters.scenarios import (SCENARIOS, correlated_pair, education_scenario, get_scenario,
                                     lattice_growth_center, paper_six_group, random_scenario, random_system)
from growthcenters.spatial import graph_distance
from growthcenters.stats import convergence_time, growth_rates, pearson


def test_six_group_parameters(six_group):
    s = six_group.system
    assert tuple(s.a) == (-0.15, -0.1, -0.05, 0.0, 0.025, 0.05)
    np.testing.assert_allclose(s.coupling.sum(axis=1), 2.0, rtol=1e-15)
    assert s.env.kind == "zero"
    assert np.array_equal(six_group.w0, np.ones(6))
    assert six_group.t_end >= 72


def test_six_group_rates_diverge_then_converge(six_group_run):
    g = growth_rates(six_group_run)
    spread = g.spread()
    assert spread[0] > 0.1
    assert convergence_time(g, 1e-3) is not None


def test_single_cell_lattice_is_malthusian():
    sc = lattice_growth_center(1, 1, 1, t_end=10.0, dt=0.5)
    assert sc.centers == (0,)
    tr = sc.run()
    assert tr.final.w[0] == pytest.approx(sc.w0[0] * np.exp(0.5), rel=1e-8)


def test_lattice_errors_and_warning():
    with pytest.raises(InputError):
        lattice_growth_center(2, 2, n_centers=5)
    with pytest.warns(UserWarning):
        lattice_growth_center(3, 3, 1, a_center=-0.01)


def test_lattice_late_profile_decays_with_distance():
    sc = lattice_growth_center(12, 12, n_centers=2, seed=3)
    tr = sc.run()
    hops = graph_distance(sc.system.coupling, sc.centers)
    profile = [np.log(tr.final.w[hops == h]).mean() for h in range(hops.max() + 1)]
    assert np.all(np.diff(profile) < 0)


def test_lattice_seed_controls_centers():
    a = lattice_growth_center(8, 8, 3, seed=1)
    b = lattice_growth_center(8, 8, 3, seed=1)
    c = lattice_growth_center(8, 8, 3, seed=2)
    assert a.centers == b.centers and np.array_equal(a.w0, b.w0)
    assert a.centers != c.centers or not np.array_equal(a.w0, c.w0)
    assert np.all(a.w0 < a.threshold)


def test_random_system_basics():
    assert random_system(1, seed=0).n == 1
    s1, s2 = random_system(7, seed=5), random_system(7, seed=5)
    assert np.array_equal(s1.a, s2.a) and np.array_equal(s1.coupling, s2.coupling)
    assert is_irreducible(random_system(50, seed=0, density=0.1).coupling)
    with pytest.raises(InputError, match="irreducible"):
        random_system(10, seed=0, density=0.0, max_retries=3)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), name=st.sampled_from(["random_system", "j_curve", "paper_six_group"]))
def test_runs_are_bit_identical(seed, name):
    kwargs = {} if name == "paper_six_group" else {"seed": seed}
    a = get_scenario(name, **kwargs).run(t_end=20.0)
    b = get_scenario(name, **kwargs).run(t_end=20.0)
    assert np.array_equal(a.w, b.w)


def test_registry():
    assert set(SCENARIOS) == {"paper_six_group", "lattice_growth_center", "random_system", "j_curve"}
    assert get_scenario("paper-six-group").name == "paper_six_group"
    with pytest.raises(InputError, match="unknown scenario"):
        get_scenario("nope")
    assert random_scenario(4, seed=1).system.n == 4


def test_correlated_pair_is_exact():
    x, y = correlated_pair(50, 0.357, seed=1)
    assert pearson(x, y) == pytest.approx(0.357, abs=1e-13)
    assert x.mean() == pytest.approx(0, abs=1e-12) and np.dot(x, x) == pytest.approx(50)


def test_education_scenario():
    sc, edu, dens = education_scenario(seed=2)
    assert pearson(edu, dens) == pytest.approx(0.357, abs=1e-12)
    order = np.argsort(edu)
    assert np.all(np.diff(sc.system.a[order]) >= 0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sc.run()
