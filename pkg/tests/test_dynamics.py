import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from growthcenters.dynamics import (EnvironmentTerm, GrowthSystem, Trajectory, aggregate, integrate,
                                    is_irreducible, random_uniform_w0, rhs, rhs_regrouped, share_rhs)
from growthcenters.errors import InputError, PositivityError
from growthcenters.scenarios import random_system

ENVS = [EnvironmentTerm.zero(), EnvironmentTerm.constant(0.3), EnvironmentTerm.mean_proportional(0.1),
        EnvironmentTerm.time_table([(0.0, 0.1), (5.0, -0.2), (10.0, 0.05)])]


def rhs_oracle(a, coupling, b, w):
    n = len(a)
    out = []
    for i in range(n):
        total = a[i] * w[i]
        for j in range(n):
            total += coupling[i][j] * w[j]
        for j in range(n):
            total -= coupling[j][i] * w[i]
        total -= b * w[i]
        out.append(total)
    return np.array(out)


def pair(a1, a2, d, env=None):
    return GrowthSystem([a1, a2], [[0, d], [d, 0]], env or EnvironmentTerm.zero())


# -- construction -----------------------------------------------------------------

def test_rejects_bad_coupling():
    with pytest.raises(InputError, match="diagonal"):
        GrowthSystem([0.1, 0.1], [[0.1, 0.2], [0.2, 0]])
    with pytest.raises(InputError, match="negative"):
        GrowthSystem([0.1, 0.1], [[0, -0.2], [0.2, 0]])
    with pytest.raises(InputError, match="2x2"):
        GrowthSystem([0.1, 0.1], [[0, 1, 0], [1, 0, 0], [0, 0, 0]])


def test_reducible_needs_opt_in():
    c = [[0, 0.1], [0, 0]]  # flow from 2 into 1 only
    with pytest.raises(InputError, match="strongly connected"):
        GrowthSystem([0.1, 0.1], c)
    assert GrowthSystem([0.1, 0.1], c, allow_reducible=True).n == 2


def test_irreducibility_is_directional():
    cycle = np.zeros((3, 3))
    cycle[1, 0] = cycle[2, 1] = cycle[0, 2] = 1.0
    assert is_irreducible(cycle)
    chain = np.zeros((3, 3))
    chain[1, 0] = chain[2, 1] = 1.0
    assert not is_irreducible(chain)


def test_system_is_immutable():
    s = pair(0.1, 0.2, 0.1)
    with pytest.raises(ValueError):
        s.a[0] = 5.0


def test_environment_kinds():
    w = np.array([1.0, 3.0])
    assert EnvironmentTerm.zero()(w, 3.0) == 0.0
    assert EnvironmentTerm.constant(0.3)(w, 3.0) == 0.3
    assert EnvironmentTerm.mean_proportional(0.5)(w, 0.0) == 1.0
    tt = EnvironmentTerm.time_table([(0.0, 0.0), (10.0, 1.0)])
    assert tt(w, 2.5) == 0.25
    assert tt(w, 20.0) == 1.0
    assert EnvironmentTerm.from_dict({"kind": "MeanProportional", "params": {"beta": 2}}).value == 2.0
    with pytest.raises(InputError):
        EnvironmentTerm("quadratic")


# -- rhs --------------------------------------------------------------------------

def test_rhs_single_malthusian_unit():
    s = GrowthSystem([0.1], [[0.0]])
    np.testing.assert_allclose(rhs(s, [2.0]), [0.2], rtol=0, atol=1e-15)


def test_rhs_symmetric_pair_cancels_transfer():
    s = pair(0.07, 0.07, 0.3)
    np.testing.assert_allclose(rhs(s, [1.5, 1.5]), [0.105, 0.105], rtol=1e-14)


@pytest.mark.parametrize("env", ENVS, ids=lambda e: e.kind)
def test_rhs_matches_term_by_term_oracle(env):
    s = random_system(3, seed=11).with_env(env)
    w = np.random.default_rng(3).uniform(0.2, 2.0, 3)
    b = env(w, 1.7)
    np.testing.assert_allclose(rhs(s, w, 1.7), rhs_oracle(s.a, s.coupling, b, w), rtol=1e-14, atol=1e-16)


def test_rhs_dimension_mismatch():
    with pytest.raises(InputError):
        rhs(pair(0.1, 0.1, 0.1), [1.0, 2.0, 3.0])


def test_regrouped_pair_hand_case():
    s = pair(0.04, 0.04, 0.2)
    np.testing.assert_allclose(rhs_regrouped(s, [2.0, 2.0]), [0.08, 0.08], rtol=1e-15)


@pytest.mark.parametrize("env", ENVS, ids=lambda e: e.kind)
def test_regrouped_equals_rhs(env):
    s = random_system(5, seed=2).with_env(env)
    w = np.random.default_rng(9).uniform(0.1, 3.0, 5)
    np.testing.assert_allclose(rhs_regrouped(s, w, 4.0), rhs(s, w, 4.0), rtol=1e-12, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 10_000))
def test_transfer_conserves_total(n, seed):
    s = random_system(n, seed)
    w = np.random.default_rng(seed).uniform(0.1, 5.0, n)
    assert abs(rhs(s, w).sum() - np.dot(s.a, w)) <= 1e-12 * max(1.0, np.abs(w).sum())


def test_initial_rates_factorize_for_uniform_start():
    a = np.array([-0.1, 0.0, 0.05, 0.2])
    c = np.random.default_rng(0).uniform(0, 0.3, (4, 4))
    c = np.triu(c, 1)
    c = c + c.T
    s = GrowthSystem(a, c, EnvironmentTerm.constant(0.02))
    w = np.full(4, 1.3)
    # uniform start only cancels in/out flows when each unit's in-rate equals its out-rate
    np.testing.assert_allclose(rhs(s, w), (a - 0.02) * w, rtol=1e-13, atol=1e-16)


# -- shares -----------------------------------------------------------------------

def test_share_rhs_symmetric_pair():
    np.testing.assert_allclose(share_rhs(pair(0.1, 0.1, 0.2), [1.0, 1.0]), [0.0, 0.0], atol=1e-16)


def test_share_rhs_requires_normalised_shares():
    with pytest.raises(InputError, match="mean 1"):
        share_rhs(pair(0.1, 0.1, 0.2), [1.0, 2.0])


@pytest.mark.parametrize("env", ENVS, ids=lambda e: e.kind)
def test_share_rhs_matches_chain_rule(env):
    s = random_system(6, seed=5).with_env(env)
    w = np.random.default_rng(1).uniform(0.3, 2.5, 6)
    t = 3.3
    mean = w.mean()
    dw = rhs(s, w, t)
    x = w / mean
    chain = dw / mean - x * dw.mean() / mean
    np.testing.assert_allclose(share_rhs(s, x), chain, rtol=1e-12, atol=1e-14)


# -- integration ------------------------------------------------------------------

def test_integrate_exponential():
    tr = integrate(GrowthSystem([0.05], [[0.0]]), [1.0], 12.0, 0.25)
    assert abs(tr.final.w[0] - np.exp(0.6)) < 1e-6
    assert tr.times[-1] == 12.0


def test_integrate_logistic_limit():
    s = GrowthSystem([1.0], [[0.0]], EnvironmentTerm.mean_proportional(1.0))
    tr = integrate(s, [0.5], 20.0, 0.05)
    exact = 1.0 / (1.0 + np.exp(-tr.times))  # W' = W - W^2, W(0) = 1/2
    np.testing.assert_allclose(tr.w[:, 0], exact, rtol=1e-8)
    assert abs(tr.final.w[0] - 1.0) < 1e-8


def test_integrate_matches_matrix_exponential():
    s = random_system(5, seed=8)
    w0 = random_uniform_w0(5, seed=8)
    tr = integrate(s, w0, 10.0, 0.05)
    m = np.diag(s.a - s.outflow) + s.coupling
    np.testing.assert_allclose(tr.final.w, expm(10.0 * m) @ w0, rtol=1e-9)


def test_partial_last_step_lands_on_t_end():
    tr = integrate(GrowthSystem([0.05], [[0.0]]), [1.0], 1.0, 0.3)
    np.testing.assert_allclose(tr.times, [0.0, 0.3, 0.6, 0.9, 1.0])
    assert abs(tr.final.w[0] - np.exp(0.05)) < 1e-10


def test_positivity_error_reports_time_and_index():
    # the RK4 amplification factor is positive on the real axis, so use a quadratic sink
    s = GrowthSystem([0.0, 0.0], [[0, 0.01], [0.01, 0]], EnvironmentTerm.mean_proportional(1.0))
    with pytest.raises(PositivityError) as info:
        integrate(s, [1.0, 1.0], 50.0, 10.0)
    assert info.value.index == 0
    assert info.value.t == 10.0
    assert "smaller dt" in str(info.value)


def test_integrate_rejects_bad_arguments():
    s = pair(0.1, 0.1, 0.1)
    for w0, t_end, dt in (([1.0, 0.0], 1.0, 0.1), ([1.0, 1.0], 1.0, 0.0), ([1.0, 1.0], -1.0, 0.1)):
        with pytest.raises(InputError):
            integrate(s, w0, t_end, dt)


def test_uniform_symmetric_system_stays_uniform():
    n = 5
    c = np.full((n, n), 0.15)
    np.fill_diagonal(c, 0)
    tr = integrate(GrowthSystem(np.full(n, 0.03), c), np.full(n, 0.7), 30.0, 0.5)
    np.testing.assert_allclose(tr.w, np.repeat(tr.w[:, :1], n, axis=1), rtol=1e-14)


@pytest.mark.parametrize("env", [EnvironmentTerm.zero(), EnvironmentTerm.constant(0.2)], ids=lambda e: e.kind)
def test_scale_covariance(env):
    s = random_system(4, seed=3).with_env(env)
    w0 = random_uniform_w0(4, seed=3)
    base = integrate(s, w0, 20.0, 0.1)
    scaled = integrate(s, 7.5 * w0, 20.0, 0.1)
    np.testing.assert_allclose(scaled.w, 7.5 * base.w, rtol=1e-12)


def test_shares_independent_of_environment():
    s = random_system(5, seed=21)
    w0 = random_uniform_w0(5, seed=21)
    ref = integrate(s, w0, 40.0, 0.05).shares()
    for env in ENVS[1:]:
        other = integrate(s.with_env(env), w0, 40.0, 0.05).shares()
        assert np.max(np.abs(other - ref)) < 1e-7


def test_aggregate():
    tr = Trajectory([0.0, 1.0], [[1.0, 3.0], [2.0, 2.0]], 1.0)
    np.testing.assert_array_equal(aggregate(tr), [2.0, 2.0])
    const = Trajectory([0.0, 1.0, 2.0], np.full((3, 4), 0.3), 1.0)
    np.testing.assert_allclose(aggregate(const), 0.3)


def test_trajectory_requires_increasing_times():
    with pytest.raises(InputError):
        Trajectory([0.0, 0.0], [[1.0], [1.0]], 1.0)


def test_determinism():
    s = random_system(6, seed=4).with_env(EnvironmentTerm.mean_proportional(0.1))
    w0 = random_uniform_w0(6, seed=4)
    a = integrate(s, w0, 15.0, 0.1)
    b = integrate(s, w0, 15.0, 0.1)
    assert np.array_equal(a.w, b.w)
