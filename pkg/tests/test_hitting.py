import itertools
import math

import numpy as np
import pytest
import scipy.linalg

from conftest import brute_hitting, random_chains
from mchit import errors
from mchit.chain import from_matrix, point_mass
from mchit.families import family, two_cliques_orbit_sets
from mchit.hitting import (expected_hitting, harmonic_measure, hit_survival, t_hit_alpha,
                           t_hit_product)
from mchit.montecarlo import mean_and_se, simulate_hitting


def test_expected_hitting_examples(c2, cycle3):
    np.testing.assert_allclose(expected_hitting(c2, [1]), [1.0, 0.0], atol=1e-10)
    np.testing.assert_array_equal(expected_hitting(c2, [0, 1]), [0.0, 0.0])
    np.testing.assert_allclose(expected_hitting(cycle3, [0]), [0.0, 2.0, 2.0], atol=1e-12)


def test_empty_target(c2):
    with pytest.raises(errors.EmptyTargetSet):
        expected_hitting(c2, [])


@pytest.mark.parametrize("chain", random_chains(), ids=lambda c: f"{c.mode}-{c.n}")
def test_expected_hitting_matches_full_system(chain):
    for A in ([0], [1, 2], list(range(chain.n - 1))):
        np.testing.assert_allclose(expected_hitting(chain, A), brute_hitting(chain, A), atol=1e-9)


def test_survival_closed_form(c2):
    for t in (0.0, 0.5, 2.0, 7.0):
        assert hit_survival(c2, [1, 0], [1], t) == pytest.approx(math.exp(-t), abs=1e-12)


def test_survival_trivial_cases(c2):
    ch = family("random", 5, seed=2)
    assert hit_survival(ch, point_mass(5, 3), [3, 4], 2.5) == 0.0
    mu = np.full(5, 0.2)
    assert hit_survival(ch, mu, [0, 1], 0.0) == pytest.approx(0.6, abs=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_survival_matches_killed_expm(seed):
    ch = family("random", 6, seed=seed)
    B = [0, 2, 3]
    mu = np.full(6, 1 / 6)
    for t in (0.4, 3.0, 25.0):
        S = scipy.linalg.expm(ch.matrix[np.ix_(B, B)] * t).sum(axis=1)
        assert hit_survival(ch, mu, [1, 4, 5], t) == pytest.approx(mu[B] @ S, abs=1e-11)


def test_discrete_survival_counts_steps():
    ch = family("random", 5, mode="discrete", seed=4)
    B = [1, 2, 3]
    for t in (0, 1, 4, 9.7):
        S = np.linalg.matrix_power(ch.matrix[np.ix_(B, B)], math.floor(t)).sum(axis=1)
        assert hit_survival(ch, point_mass(5, 2), [0, 4], t) == pytest.approx(S[1], abs=1e-13)


@pytest.mark.parametrize("chain", random_chains(6), ids=lambda c: f"{c.mode}-{c.n}")
def test_survival_monotone_markov_and_vanishing(chain):
    A = [0]
    mu = np.full(chain.n, 1 / chain.n)
    h = expected_hitting(chain, A)
    ts = np.linspace(0.5, 10 * h.max(), 12)
    surv = [hit_survival(chain, mu, A, t) for t in ts]
    assert all(b <= a + 1e-12 for a, b in zip(surv, surv[1:]))
    for t, s in zip(ts, surv):
        assert s <= mu @ h / t + 1e-12
    assert surv[-1] < 0.05


def test_harmonic_measure_examples(c2, cycle4):
    np.testing.assert_array_equal(harmonic_measure(c2, [1, 0], [0, 1]), [1.0, 0.0])
    np.testing.assert_allclose(harmonic_measure(c2, [1, 0], [1]), [0.0, 1.0])
    np.testing.assert_allclose(harmonic_measure(cycle4, point_mass(4, 0), [1, 3]),
                               [0, 0.5, 0, 0.5], atol=1e-12)


def test_harmonic_measure_supported_on_target():
    ch = family("random", 7, seed=12)
    rho = harmonic_measure(ch, np.full(7, 1 / 7), [1, 5])
    assert rho.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(rho[[0, 2, 3, 4, 6]] == 0)


def test_t_hit_alpha_examples(c2):
    rep = t_hit_alpha(c2, 0.3)
    assert rep.value == pytest.approx(1.0) and rep.witness_set == (1,) and rep.witness_state == 0
    rep = t_hit_alpha(c2, 0.5)
    assert rep.value == pytest.approx(0.5) and rep.witness_set == (0,) and rep.witness_state == 1
    assert t_hit_alpha(c2, 1.0).value == 0.0
    assert t_hit_alpha(c2, 1.0).exact


def test_bad_alpha(c2):
    for a in (0.0, -0.1, 1.5):
        with pytest.raises(errors.BadAlpha):
            t_hit_alpha(c2, a)


def test_t_hit_product_examples(c2):
    rep = t_hit_product(c2)
    assert rep.value == pytest.approx(1 / 3, abs=1e-12)
    # two witnesses tie; the lexicographically smaller set wins
    assert rep.witness_set == (0,) and rep.witness_state == 1


def test_complete_jump_chain_product_near_one():
    # exact value for K_n walk at unit exit rate is (n-1)/n
    rep = t_hit_product(family("complete", 8))
    assert rep.value == pytest.approx(7 / 8, abs=1e-10)
    assert abs(rep.value - 1.0) <= 0.15


def test_near_absorbing_state_blows_up():
    ch = from_matrix([[-1.0, 1.0], [0.01, -0.01]])
    # a small set can be slow to reach, but its mass scales the product back
    assert t_hit_alpha(ch, 0.005).value == pytest.approx(100.0, rel=1e-10)
    assert t_hit_product(ch).value == pytest.approx(1 / 1.01, rel=1e-10)
    slow = from_matrix([[-0.01, 0.01], [0.01, -0.01]])
    assert t_hit_product(slow).value == pytest.approx(50.0, rel=1e-10)


def _independent_t_hit(chain, alpha):
    """Per-subset recomputation through the full-matrix system."""
    best = 0.0
    for k in range(1, chain.n + 1):
        for A in itertools.combinations(range(chain.n), k):
            if chain.pi[list(A)].sum() >= alpha - 1e-12:
                best = max(best, brute_hitting(chain, A).max())
    return best


def _independent_product(chain):
    return max(chain.pi[list(A)].sum() * brute_hitting(chain, A).max()
               for k in range(1, chain.n + 1) for A in itertools.combinations(range(chain.n), k))


@pytest.mark.parametrize("chain", random_chains(8, sizes=range(3, 9)), ids=lambda c: f"{c.mode}-{c.n}")
def test_enumeration_matches_independent(chain):
    for alpha in (0.1, 0.3, 0.6):
        rep = t_hit_alpha(chain, alpha)
        assert rep.value == pytest.approx(_independent_t_hit(chain, alpha), rel=1e-9)
        assert chain.pi[list(rep.witness_set)].sum() >= alpha - 1e-12
        assert expected_hitting(chain, rep.witness_set)[rep.witness_state] == pytest.approx(rep.value, abs=1e-9)
    assert t_hit_product(chain).value == pytest.approx(_independent_product(chain), rel=1e-9)


@pytest.mark.parametrize("chain", random_chains(6), ids=lambda c: f"{c.mode}-{c.n}")
def test_monotone_in_alpha_and_product_bound(chain):
    grid = np.linspace(0.05, 1.0, 12)
    vals = [t_hit_alpha(chain, a).value for a in grid]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    prod = t_hit_product(chain).value
    for eps, v in zip(grid, vals):
        assert v <= prod / eps + 1e-9


def test_too_large_without_heuristic():
    ch = family("random", 20, seed=1)
    with pytest.raises(errors.TooLargeForExact):
        t_hit_alpha(ch, 0.3)
    rep = t_hit_alpha(ch, 0.3, heuristic=True)
    assert not rep.exact and ch.pi[list(rep.witness_set)].sum() >= 0.3 - 1e-12


def test_heuristic_never_exceeds_exact():
    ch = family("random", 10, seed=8)
    exact = t_hit_alpha(ch, 0.25).value
    heur = t_hit_alpha(ch, 0.25, heuristic=True, max_exact=4)
    assert heur.value <= exact + 1e-12
    assert heur.value >= 0.5 * exact


@pytest.mark.parametrize("n", [3, 4, 6])
def test_two_cliques_orbits_cover_all_sets(n):
    ch = family("two-cliques", n)
    for alpha in (0.3, 0.6):
        full = t_hit_alpha(ch, alpha).value
        orbit = t_hit_alpha(ch, alpha, candidate_sets=two_cliques_orbit_sets(n)).value
        assert orbit == pytest.approx(full, rel=1e-12)


@pytest.mark.parametrize("chain", [family("cycle", 5), family("random", 5, seed=3),
                                   family("random", 4, mode="discrete", seed=6)],
                         ids=["cycle5", "random5", "random-d4"])
def test_monte_carlo_means(chain):
    h = expected_hitting(chain, [0])
    times = simulate_hitting(chain, point_mass(chain.n, chain.n - 1), [0], 10_000, seed=5)
    mean, se = mean_and_se(times)
    assert abs(mean - h[-1]) <= 3 * se
