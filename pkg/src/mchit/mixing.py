"""Total-variation distances to stationarity, mixing times, and the
uniform-average (Cesaro) surrogate for the averaged mixing time.

The Cesaro time uses the uniform averaging measure on ``[0, t]``
(continuous) or on ``{0, ..., t-1}`` (discrete).  Being one admissible
averaging measure, it upper-bounds the averaged mixing time, whose infimum
over all measures is never computed here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import errors
from .chain import MarkovChain, kernel_at
from .records import VerifyRecord, record
from .uniformization import cesaro_power_sum, discrete_average

SCAN_POINTS = 64
REL_TOL = 1e-6
MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class MixingProfile:
    delta: float
    time: float
    kind: str  # "plain" or "cesaro"
    curve: list = field(default_factory=list)  # sorted (t, distance) samples

    def distance_at_time(self) -> float:
        return dict(self.curve)[self.time]

    def to_dict(self) -> dict:
        return {"delta": self.delta, "time": self.time, "kind": self.kind,
                "curve": [[t, d] for t, d in self.curve]}


def _rows_to_pi(K: np.ndarray, pi: np.ndarray) -> np.ndarray:
    return 0.5 * np.abs(K - pi).sum(axis=1)


def _pairwise(K: np.ndarray) -> float:
    return float(0.5 * np.abs(K[:, None, :] - K[None, :, :]).sum(axis=-1).max())


def d_worst(chain: MarkovChain, t) -> float:
    """``max_x d_TV(p_t(x, .), pi)``."""
    return float(_rows_to_pi(kernel_at(chain, t), chain.pi).max())


def d_bar(chain: MarkovChain, t) -> float:
    """``max_{x,z} d_TV(p_t(x, .), p_t(z, .))``."""
    return _pairwise(kernel_at(chain, t))


def cesaro_kernel(chain: MarkovChain, t) -> np.ndarray:
    """Uniform time average of the kernel over ``[0, t]``.

    Discrete chains average ``P^0, ..., P^{t-1}`` and need integer ``t >= 1``.
    """
    if chain.continuous:
        if not t > 0:
            raise errors.BadTime(f"Cesaro kernel needs t > 0, got {t}")
        avg, _ = cesaro_power_sum(chain.jump_matrix, chain.rate * float(t),
                                  chain.config.series_tail)
        return avg
    if int(t) != t or t < 1:
        raise errors.BadTime(f"discrete Cesaro kernel needs integer t >= 1, got {t}")
    return discrete_average(chain.matrix, int(t))


def cesaro_distance(chain: MarkovChain, t) -> float:
    if t == 0 or (not chain.continuous and t == 1):
        return float(1.0 - chain.pi.min())
    return float(_rows_to_pi(cesaro_kernel(chain, t), chain.pi).max())


def cesaro_pairwise(chain: MarkovChain, t) -> float:
    return _pairwise(cesaro_kernel(chain, t))


def _check_delta(delta):
    if not (0 < delta < 1):
        raise errors.BadDelta(f"delta must lie in (0, 1), got {delta}")


def _double_until(dist, start, delta, step):
    t = start
    for _ in range(MAX_DOUBLINGS):
        d = dist(t)
        if d <= delta:
            return t
        t = step(t)
    raise errors.NotMixing(f"distance still above {delta} at t = {t}")


def mixing_time(chain: MarkovChain, delta: float) -> MixingProfile:
    """Smallest ``t`` with ``d_worst(t) <= delta``.

    ``d_worst`` is nonincreasing in both modes, so a doubling bracket
    followed by bisection finds the threshold; continuous results carry
    relative accuracy ``REL_TOL`` and are always on the passing side.
    """
    _check_delta(delta)
    curve = {}

    def dist(t):
        if t not in curve:
            curve[t] = d_worst(chain, t)
        return curve[t]

    if dist(0) <= delta:
        return MixingProfile(delta, 0, "plain", sorted(curve.items()))
    if chain.continuous:
        hi = _double_until(dist, 1.0 / chain.rate, delta, lambda t: 2 * t)
        lo = hi / 2 if hi > 1.0 / chain.rate else 0.0
        while hi - lo > REL_TOL * hi:
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if dist(mid) <= delta else (mid, hi)
    else:
        hi = _double_until(dist, 1, delta, lambda t: 2 * t)
        lo = hi // 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            lo, hi = (lo, mid) if dist(mid) <= delta else (mid, hi)
    return MixingProfile(delta, hi, "plain", sorted(curve.items()))


def cesaro_mixing_time(chain: MarkovChain, delta: float) -> MixingProfile:
    """Smallest horizon (on a refined grid) where the uniform time average of
    every row is within ``delta`` of stationarity.

    Monotonicity of the averaged distance is not assumed: after doubling to a
    passing horizon, ``SCAN_POINTS`` evenly spaced horizons below it are
    scanned and the first passing one is refined by bisection against its
    failing left neighbour.  The returned horizon always passes.
    """
    _check_delta(delta)
    curve = {}

    def dist(t):
        if t not in curve:
            curve[t] = cesaro_distance(chain, t)
        return curve[t]

    start = 0 if chain.continuous else 1
    if dist(start) <= delta:
        return MixingProfile(delta, start, "cesaro", sorted(curve.items()))
    if chain.continuous:
        hi = _double_until(dist, 1.0 / chain.rate, delta, lambda t: 2 * t)
        grid = [hi * j / SCAN_POINTS for j in range(1, SCAN_POINTS + 1)]
        first = next(j for j, t in enumerate(grid) if dist(t) <= delta)
        lo, hi = (grid[first - 1] if first else 0.0), grid[first]
        while hi - lo > REL_TOL * hi:
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if dist(mid) <= delta else (mid, hi)
    else:
        hi = _double_until(dist, 2, delta, lambda t: 2 * t)
        grid = sorted({max(2, math.ceil(hi * j / SCAN_POINTS)) for j in range(1, SCAN_POINTS + 1)})
        first = next(j for j, t in enumerate(grid) if dist(t) <= delta)
        lo, hi = (grid[first - 1] if first else 1), grid[first]
        while hi - lo > 1:
            mid = (lo + hi) // 2
            lo, hi = (lo, mid) if dist(mid) <= delta else (mid, hi)
    return MixingProfile(delta, hi, "cesaro", sorted(curve.items()))


def check_submultiplicativity(chain: MarkovChain, s_grid, t_grid,
                              name: str = "chain") -> list[VerifyRecord]:
    """Records for ``d_bar(s + t) <= d_bar(s) d_bar(t)``."""
    cache = {}

    def db(t):
        if t not in cache:
            cache[t] = d_bar(chain, t)
        return cache[t]

    return [record("dbar-submult", name, db(s + t), db(s) * db(t),
                   "d_bar(s+t) <= d_bar(s) d_bar(t)", s=s, t=t)
            for s in s_grid for t in t_grid]
