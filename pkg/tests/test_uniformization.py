import numpy as np
import pytest
import scipy.linalg
from scipy.integrate import quad_vec

from mchit.families import family
from mchit.uniformization import (cesaro_power_sum, cesaro_weights, discrete_average,
                                  poisson_power_sum)


@pytest.mark.parametrize("tau", [0.5, 3.0, 31.9, 200.0])
def test_cesaro_weights_sum_to_one(tau):
    assert cesaro_weights(min(tau, 32.0), 1e-16).sum() == pytest.approx(1.0, abs=1e-12)


def test_stack_matches_individual():
    Q = family("random", 5, seed=3).matrix
    M = np.eye(5) + Q / 1.5
    stack = np.stack([M, M @ M])
    out = poisson_power_sum(stack, 7.0)
    np.testing.assert_allclose(out[1], poisson_power_sum(M @ M, 7.0), atol=1e-14)


@pytest.mark.parametrize("lam_t", [0.0, 0.3, 40.0, 5000.0])
def test_substochastic_block_matches_expm(lam_t):
    Q = family("random", 6, seed=9).matrix
    lam = 1.05 * np.max(-np.diag(Q))
    B = [1, 2, 4, 5]
    G = Q[np.ix_(B, B)]
    got = poisson_power_sum(np.eye(4) + G / lam, lam_t, stochastic=False)
    np.testing.assert_allclose(got, scipy.linalg.expm(G * lam_t / lam), atol=1e-11)


@pytest.mark.parametrize("t", [0.05, 1.0, 12.0, 90.0])
def test_cesaro_matches_quadrature(t):
    Q = family("random", 5, seed=21).matrix
    lam = 1.05 * np.max(-np.diag(Q))
    avg, end = cesaro_power_sum(np.eye(5) + Q / lam, lam * t)
    quad, _ = quad_vec(lambda s: scipy.linalg.expm(Q * s), 0.0, t, epsabs=1e-13, epsrel=1e-12)
    np.testing.assert_allclose(avg, quad / t, atol=1e-9)
    np.testing.assert_allclose(end, scipy.linalg.expm(Q * t), atol=1e-10)


@pytest.mark.parametrize("t", [1, 2, 3, 7, 64, 100])
def test_discrete_average_brute_force(t):
    P = family("random", 4, mode="discrete", seed=5).matrix
    brute = sum(np.linalg.matrix_power(P, k) for k in range(t)) / t
    np.testing.assert_allclose(discrete_average(P, t), brute, atol=1e-13)
