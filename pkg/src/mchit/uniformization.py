"""Poisson-mixture series for matrix exponentials and their time averages.

For a generator ``Q`` and a rate ``lam >= max |q(x,x)|`` the matrix
``M = I + Q/lam`` is (sub)stochastic and

    exp(Q t)              = sum_k Pois(lam t; k) M^k
    (1/t) int_0^t exp(Qs) = sum_k P[Pois(lam t) > k] / (lam t) M^k

Both sums have nonnegative weights, so the results stay entrywise
nonnegative.  Long horizons are split as ``t = 2**m * tau`` and rebuilt by
squaring (exponential) or by ``C(2s) = (C(s) + K(s) C(s)) / 2`` (average),
which preserves nonnegativity as well.  Every function accepts a single
matrix or a stack of shape ``(..., k, k)``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.stats import poisson

MAX_TAU = 32.0


def _split(lam_t: float, tail: float) -> tuple[int, float, float]:
    m = 0 if lam_t <= MAX_TAU else math.ceil(math.log2(lam_t / MAX_TAU))
    tau = lam_t / 2.0**m
    # squaring multiplies truncation error by the number of factors
    return m, tau, tail / 2.0**m


def _support(tau: float) -> np.ndarray:
    return np.arange(0, int(tau + 14.0 * math.sqrt(tau) + 80))


def poisson_cutoff(tau: float, tail: float) -> int:
    """Smallest K with P[Pois(tau) > K] < tail."""
    ks = _support(tau)
    sf = poisson.sf(ks, tau)
    below = np.nonzero(sf < tail)[0]
    if below.size == 0:  # pragma: no cover - support is generous
        raise RuntimeError(f"Poisson support too short for tau={tau}")
    return int(below[0])


def _eye_like(M: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.eye(M.shape[-1]), M.shape).copy()


def _renorm(A: np.ndarray) -> np.ndarray:
    return A / A.sum(axis=-1, keepdims=True)


def _series(M: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # Horner: w0 I + M (w1 I + M (w2 I + ...))
    eye = _eye_like(M)
    acc = weights[-1] * eye
    for w in weights[-2::-1]:
        acc = M @ acc
        acc += w * eye
    return acc


def poisson_power_sum(M, lam_t: float, tail: float = 1e-13,
                      stochastic: bool = True) -> np.ndarray:
    """``sum_k Pois(lam_t; k) M^k``, i.e. ``exp(lam_t (M - I))``.

    With ``stochastic=True`` rows are renormalized after every squaring,
    which removes accumulated rounding drift; leave it off for
    substochastic blocks, whose row mass is the quantity of interest.
    """
    M = np.asarray(M, dtype=float)
    if lam_t < 0:
        raise ValueError("lam_t must be nonnegative")
    if lam_t == 0:
        return _eye_like(M)
    m, tau, tail_each = _split(lam_t, tail)
    K = poisson_cutoff(tau, tail_each)
    weights = poisson.pmf(np.arange(K + 1), tau)
    out = _series(M, weights)
    if stochastic:
        out = _renorm(out)
    for _ in range(m):
        out = out @ out
        if stochastic:
            out = _renorm(out)
    return out


def cesaro_weights(tau: float, tail: float) -> np.ndarray:
    """Weights ``P[Pois(tau) > k] / tau`` truncated once the rest is < tail."""
    ks = _support(tau)
    w = poisson.sf(ks, tau) / tau
    rest = np.cumsum(w[::-1])[::-1]  # rest[k] = sum_{j >= k} w_j
    below = np.nonzero(rest < tail)[0]
    K = int(below[0]) if below.size else len(w)
    return w[:K]


def cesaro_power_sum(M, lam_t: float, tail: float = 1e-13) -> tuple[np.ndarray, np.ndarray]:
    """Time average of ``exp(s lam (M - I))`` over ``s`` in ``[0, lam_t/lam]``.

    Returns ``(average, endpoint)`` where ``endpoint`` is the exponential at
    the full horizon; both are needed for the doubling recursion.
    """
    M = np.asarray(M, dtype=float)
    if lam_t <= 0:
        raise ValueError("lam_t must be positive")
    m, tau, tail_each = _split(lam_t, tail)
    avg = _renorm(_series(M, cesaro_weights(tau, tail_each)))
    K = poisson_cutoff(tau, tail_each)
    end = _renorm(_series(M, poisson.pmf(np.arange(K + 1), tau)))
    for _ in range(m):
        avg = _renorm(0.5 * (avg + end @ avg))
        end = _renorm(end @ end)
    return avg, end


def discrete_power(P, t: int) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    return np.linalg.matrix_power(P, int(t))


def discrete_average(P, t: int) -> np.ndarray:
    """``(1/t) sum_{k<t} P^k`` by binary doubling; ``t >= 1``."""
    P = np.asarray(P, dtype=float)
    t = int(t)
    if t < 1:
        raise ValueError("t must be >= 1")
    eye = _eye_like(P)
    # invariant: S = sum_{k<a} P^k, Pa = P^a
    S, Pa, a = eye.copy(), P.copy(), 1
    for bit in bin(t)[3:]:
        S = S + Pa @ S
        Pa = Pa @ Pa
        a *= 2
        if bit == "1":
            S = eye + P @ S
            Pa = P @ Pa
            a += 1
    assert a == t
    return S / t
