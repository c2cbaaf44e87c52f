"""Seeded trajectory simulation.

Reproducibility across worker counts: a request for ``samples`` draws is cut
into fixed chunks of ``CHUNK`` samples; chunk ``j`` draws from the ``j``-th
child of ``numpy.random.SeedSequence(seed)``.  Chunk boundaries depend only
on ``samples``, never on the number of workers, and results are
concatenated in chunk order.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import errors
from .chain import MarkovChain, check_distribution

CHUNK = 8192


@dataclass(frozen=True)
class PathSample:
    seed: int
    times: np.ndarray   # jump times (continuous) or step indices (discrete)
    states: np.ndarray  # state entered at each time; states[0] is the start
    horizon: float
    mode: str

    def occupation(self, n: int) -> np.ndarray:
        """Fraction of ``[0, horizon]`` spent in each state."""
        occ = np.zeros(n)
        if self.mode == "continuous":
            ends = np.append(self.times[1:], self.horizon)
            np.add.at(occ, self.states, ends - self.times)
            return occ / self.horizon
        np.add.at(occ, self.states[:-1], 1.0)
        return occ / (len(self.states) - 1)


def _tables(chain: MarkovChain):
    if chain.continuous:
        Q = chain.matrix
        rates = -np.diag(Q).copy()
        J = Q / rates[:, None]
        np.fill_diagonal(J, 0.0)
        return rates, np.cumsum(J, axis=1)
    return None, np.cumsum(chain.matrix, axis=1)


def _draw_next(cum: np.ndarray, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    nxt = (u[:, None] * cum[x, -1][:, None] >= cum[x]).sum(axis=1)
    return np.minimum(nxt, cum.shape[1] - 1)


def sample_path(chain: MarkovChain, x0: int, horizon, seed: int) -> PathSample:
    """One trajectory on ``[0, horizon]``.

    Continuous mode records only jumps, so consecutive states differ;
    discrete mode records every step, self-loops included.
    """
    if not horizon > 0:
        raise errors.BadHorizon(f"horizon must be positive, got {horizon}")
    rng = np.random.default_rng(seed)
    rates, cum = _tables(chain)
    x = int(x0)
    times, states = [0.0], [x]
    if chain.continuous:
        t = 0.0
        while True:
            t += rng.exponential(1.0 / rates[x])
            if t > horizon:
                break
            x = int(_draw_next(cum, np.array([x]), rng.random(1))[0])
            times.append(t)
            states.append(x)
    else:
        for step in range(1, int(horizon) + 1):
            x = int(_draw_next(cum, np.array([x]), rng.random(1))[0])
            times.append(step)
            states.append(x)
    return PathSample(seed=seed, times=np.array(times), states=np.array(states, dtype=int),
                      horizon=float(horizon), mode=chain.mode)


def run_until(chain: MarkovChain, starts: np.ndarray, stop: np.ndarray, rng,
              watch: np.ndarray | None = None):
    """Advance many independent copies until each enters its own stop set.

    ``stop`` and ``watch`` are ``(N, n)`` boolean masks, one row per copy.
    Returns ``(stop_time, stop_state, watch_time)`` where ``watch_time`` is
    the first entrance time into the watch set (NaN if never entered
    before stopping).
    """
    rates, cum = _tables(chain)
    N = starts.shape[0]
    rows = np.arange(N)
    x = starts.astype(int).copy()
    t = np.zeros(N)
    watch_t = np.full(N, np.nan)
    if watch is not None:
        watch_t[watch[rows, x]] = 0.0
    active = ~stop[rows, x]
    while active.any():
        idx = np.nonzero(active)[0]
        xi = x[idx]
        if chain.continuous:
            t[idx] += rng.exponential(1.0, idx.size) / rates[xi]
        else:
            t[idx] += 1.0
        x[idx] = _draw_next(cum, xi, rng.random(idx.size))
        if watch is not None:
            fresh = idx[np.isnan(watch_t[idx]) & watch[idx, x[idx]]]
            watch_t[fresh] = t[fresh]
        active[idx] = ~stop[idx, x[idx]]
    return t, x, watch_t


def _chunked(fn, samples: int, seed: int, workers: int):
    sizes = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        sizes.append(samples % CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(size, np.random.default_rng(ss)) for size, ss in zip(sizes, children)]
    if workers <= 1 or len(jobs) <= 1:
        parts = [fn(size, rng) for size, rng in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    return [np.concatenate(cols) for cols in zip(*parts)]


def _check_rule(chain, rule):
    if rule.chain_fingerprint != chain.fingerprint:
        raise errors.ChainMismatch("rule was built for a different chain")


def sample_rule_stops(chain: MarkovChain, rule, samples: int, seed: int = 0,
                      workers: int = 1):
    """Draw ``samples`` independent ``(T, X_T)`` pairs.

    The set index is drawn first and independently of the path.
    """
    _check_rule(chain, rule)
    masks = rule.set_masks
    n = chain.n

    def one(size, rng):
        which = rng.choice(n, size=size, p=rule.probs / rule.probs.sum())
        starts = rng.choice(n, size=size, p=rule.mu0)
        t, x, _ = run_until(chain, starts, masks[which], rng)
        return t, x

    times, states = _chunked(one, samples, seed, workers)
    return times, states.astype(int)


def sample_rule_stop(chain: MarkovChain, rule, seed: int):
    times, states = sample_rule_stops(chain, rule, 1, seed)
    return float(times[0]), int(states[0])


def sample_rule_stop_with_halting(chain: MarkovChain, rule, paths: int, seed: int = 0,
                                  workers: int = 1):
    """Returns ``(T, first visit time of the halting state)`` per path."""
    _check_rule(chain, rule)
    masks = rule.set_masks
    n = chain.n
    halt = np.zeros(n, dtype=bool)
    halt[rule.halting_state] = True

    def one(size, rng):
        which = rng.choice(n, size=size, p=rule.probs / rule.probs.sum())
        starts = rng.choice(n, size=size, p=rule.mu0)
        stop = np.broadcast_to(halt, (size, n))
        t, _, watch_t = run_until(chain, starts, stop, rng, watch=masks[which])
        return watch_t, t

    if paths <= 0:
        return np.zeros(0), np.zeros(0)
    return tuple(_chunked(one, paths, seed, workers))


def simulate_hitting(chain: MarkovChain, mu0, A, samples: int, seed: int = 0,
                     workers: int = 1) -> np.ndarray:
    """Sampled hitting times of ``A`` from initial law ``mu0``."""
    mu0 = check_distribution(mu0, chain.n, chain.config)
    target = np.zeros(chain.n, dtype=bool)
    target[list(A)] = True

    def one(size, rng):
        starts = rng.choice(chain.n, size=size, p=mu0)
        t, _, _ = run_until(chain, starts, np.broadcast_to(target, (size, chain.n)), rng)
        return (t,)

    return _chunked(one, samples, seed, workers)[0]


def mean_and_se(x: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(x.size))
