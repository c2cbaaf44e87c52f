import math

import numpy as np
import pytest
import scipy.linalg
from scipy.integrate import quad

from conftest import random_chains
from mchit import errors
from mchit.families import family
from mchit.mixing import (cesaro_distance, cesaro_kernel, cesaro_mixing_time, cesaro_pairwise,
                          check_submultiplicativity, d_bar, d_worst, mixing_time)


@pytest.mark.parametrize("t", [0.0, 0.05, 0.4, 2.0])
def test_two_state_distances(c2, t):
    assert d_worst(c2, t) == pytest.approx(2 / 3 * math.exp(-3 * t), abs=1e-12)
    assert d_bar(c2, t) == pytest.approx(math.exp(-3 * t), abs=1e-12)


@pytest.mark.parametrize("chain", random_chains(6), ids=lambda c: f"{c.mode}-{c.n}")
def test_distance_relations(chain):
    assert d_worst(chain, 0) == pytest.approx(1 - chain.pi.min(), abs=1e-12)
    assert d_bar(chain, 0) == pytest.approx(1.0)
    grid = [0, 1, 2, 3, 5, 8, 13, 21]
    ds = [d_worst(chain, t) for t in grid]
    assert all(b <= a + 1e-10 for a, b in zip(ds, ds[1:]))
    for t, d in zip(grid, ds):
        db = d_bar(chain, t)
        assert d - 1e-12 <= db <= 2 * d + 1e-12


def test_distance_decays():
    chain = family("random", 6, seed=2)
    assert d_worst(chain, 200.0) <= 1e-6


def test_two_state_mixing_time(c2):
    prof = mixing_time(c2, 0.25)
    assert prof.time == pytest.approx(math.log(8 / 3) / 3, rel=1e-5)
    assert d_worst(c2, prof.time) <= 0.25 + 1e-9
    assert mixing_time(c2, 2 / 3 - 1e-9).time <= 1e-6
    assert mixing_time(c2, 0.7).time == 0


@pytest.mark.parametrize("chain", random_chains(6) + [family("cycle", 6, mode="discrete", lazy=True)],
                         ids=lambda c: f"{c.mode}-{c.n}")
def test_profile_bracketing_and_monotone_delta(chain):
    times = []
    for delta in (0.05, 0.1, 0.25, 0.4):
        prof = mixing_time(chain, delta)
        assert d_worst(chain, prof.time) <= delta + 1e-9
        if prof.time > 0:
            half = prof.time / 2 if chain.continuous else prof.time - 1
            assert d_worst(chain, half) > delta
        times.append(prof.time)
    assert all(b <= a for a, b in zip(times, times[1:]))


def test_bad_delta(c2):
    for bad in (0.0, 1.0, -0.2):
        with pytest.raises(errors.BadDelta):
            mixing_time(c2, bad)
        with pytest.raises(errors.BadDelta):
            cesaro_mixing_time(c2, bad)


def test_two_cliques_quadratic_signature():
    small = mixing_time(family("two-cliques", 10), 0.25).time
    large = mixing_time(family("two-cliques", 20), 0.25).time
    assert large / small >= 3


def test_discrete_cesaro_kernel_at_one():
    chain = family("random", 4, mode="discrete", seed=1)
    np.testing.assert_array_equal(cesaro_kernel(chain, 1), np.eye(4))
    with pytest.raises(errors.BadTime):
        cesaro_kernel(chain, 2.5)


def test_cesaro_two_state_quadrature(c2):
    for t in (0.2, 1.0, 6.0):
        exact = quad(lambda s: 2 / 3 + math.exp(-3 * s) / 3, 0, t)[0] / t
        assert cesaro_kernel(c2, t)[0, 0] == pytest.approx(exact, abs=1e-11)
        assert 2 / 3 + (1 - math.exp(-3 * t)) / (9 * t) == pytest.approx(exact, abs=1e-11)
    with pytest.raises(errors.BadTime):
        cesaro_kernel(c2, 0)


def test_cesaro_kernel_random_against_expm():
    chain = family("random", 5, seed=17)
    t = 3.0
    exact = quad(lambda s: scipy.linalg.expm(chain.matrix * s)[2, 4], 0, t, epsabs=1e-13)[0] / t
    assert cesaro_kernel(chain, t)[2, 4] == pytest.approx(exact, abs=1e-10)


@pytest.mark.parametrize("chain", [family("cycle", 5), family("biased-cycle", 3),
                                   family("random", 6, seed=3),
                                   family("random", 5, mode="discrete", seed=9)],
                         ids=["cycle5", "biased3", "random6", "random-d5"])
def test_cesaro_mixing_time(chain):
    prof = cesaro_mixing_time(chain, 0.25)
    assert prof.kind == "cesaro" and math.isfinite(prof.time)
    assert cesaro_distance(chain, prof.time) <= 0.25 + 1e-9
    assert cesaro_pairwise(chain, prof.time) <= 2 * 0.25 + 1e-9


def test_cesaro_already_mixed(c2):
    assert cesaro_mixing_time(c2, 0.7).time == 0
    chain = family("random", 4, mode="discrete", seed=2)
    assert cesaro_mixing_time(chain, 1 - chain.pi.min() + 1e-6).time == 1


def test_submultiplicativity_two_state_equality(c2):
    recs = check_submultiplicativity(c2, [0.0, 0.3, 1.0], [0.1, 0.5])
    for r in recs:
        assert r.passed
        assert r.lhs == pytest.approx(r.rhs, abs=1e-12)


@pytest.mark.parametrize("chain", random_chains(6), ids=lambda c: f"{c.mode}-{c.n}")
def test_submultiplicativity_grid(chain):
    grid = [1, 2, 3, 5, 8] if not chain.continuous else [0.2, 0.7, 1.5, 3.0, 6.0]
    recs = check_submultiplicativity(chain, grid, grid, name="r")
    assert len(recs) == 25 and all(r.passed for r in recs)
