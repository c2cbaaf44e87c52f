"""Hitting times of sets: expectations, survival functions, harmonic measures,
and the worst-case functionals over large sets.

Both modes are handled through the "generator" ``G = Q`` (continuous) or
``G = P - I`` (discrete): expected hitting times solve ``-G_BB h = 1`` on the
complement ``B`` of the target, and absorption probabilities solve
``-G_BB R = G_BA``.
"""
from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, asdict
from typing import Iterable, Sequence

import numpy as np

from . import errors
from .chain import MarkovChain, check_distribution
from .uniformization import discrete_power, poisson_power_sum

_MASS_TOL = 1e-12
_TIE_TOL = 1e-12


def _generator(chain: MarkovChain) -> np.ndarray:
    if chain.continuous:
        return chain.matrix
    return chain.matrix - np.eye(chain.n)


def _as_set(chain: MarkovChain, A) -> np.ndarray:
    idx = np.unique(np.asarray(list(A), dtype=int))
    if idx.size == 0:
        raise errors.EmptyTargetSet("target set is empty")
    if idx.min() < 0 or idx.max() >= chain.n:
        raise errors.MarkovError(f"state index out of range in {sorted(A)}")
    return idx


def _complement(n: int, A: np.ndarray) -> np.ndarray:
    inside = np.zeros(n, dtype=bool)
    inside[A] = True
    return np.nonzero(~inside)[0]


def _solve(M, rhs, what):
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise errors.SolverFailure(f"{what}: {exc}") from None
    if not np.all(np.isfinite(sol)):
        raise errors.SolverFailure(f"{what}: non-finite solution")
    return sol


def expected_hitting(chain: MarkovChain, A) -> np.ndarray:
    """``E_x[H_A]`` for every start state ``x``."""
    A = _as_set(chain, A)
    B = _complement(chain.n, A)
    h = np.zeros(chain.n)
    if B.size:
        G = _generator(chain)
        h[B] = _solve(-G[np.ix_(B, B)], np.ones(B.size), "expected hitting")
    if h.min() < -1e-9 * max(1.0, h.max()):
        raise errors.SolverFailure(f"negative hitting time {h.min()!r}")
    return np.clip(h, 0.0, None)


def hit_survival(chain: MarkovChain, mu0, A, t) -> float:
    """``P_mu0[H_A > t]``, exact up to series truncation.

    Discrete chains use ``floor(t)``.
    """
    if t < 0:
        raise errors.NegativeTime(f"t = {t} < 0")
    mu0 = check_distribution(mu0, chain.n, chain.config)
    A = _as_set(chain, A)
    B = _complement(chain.n, A)
    if B.size == 0:
        return 0.0
    S = _survival_block(chain, B[None, :], t)[0]
    return float(np.clip(mu0[B] @ S, 0.0, 1.0))


def _survival_block(chain: MarkovChain, B: np.ndarray, t) -> np.ndarray:
    """Row mass of the killed semigroup on each complement in a stack ``B``.

    ``B`` has shape ``(count, k)``; returns ``(count, k)`` survival
    probabilities from each complement state.
    """
    if chain.continuous:
        M = chain.jump_matrix[B[:, :, None], B[:, None, :]]
        K = poisson_power_sum(M, chain.rate * float(t), chain.config.series_tail,
                              stochastic=False)
    else:
        P = chain.matrix[B[:, :, None], B[:, None, :]]
        K = discrete_power(P, math.floor(t))
    return np.clip(K.sum(axis=-1), 0.0, 1.0)


def absorption_matrix(chain: MarkovChain, S) -> np.ndarray:
    """``R[x, a] = P_x[X_{H_S} = a]`` as an ``n x n`` matrix."""
    S = _as_set(chain, S)
    B = _complement(chain.n, S)
    R = np.zeros((chain.n, chain.n))
    R[S, S] = 1.0
    if B.size:
        G = _generator(chain)
        R[np.ix_(B, S)] = _solve(-G[np.ix_(B, B)], G[np.ix_(B, S)], "absorption")
    R = np.clip(R, 0.0, None)
    worst = np.abs(R.sum(axis=1) - 1.0).max()
    if worst > chain.config.absorption_sum:
        raise errors.SolverFailure(f"absorption rows off by {worst:.3e}")
    return R


def harmonic_measure(chain: MarkovChain, mu0, S) -> np.ndarray:
    """Law of the entrance position ``X_{H_S}`` under ``P_mu0``."""
    mu0 = check_distribution(mu0, chain.n, chain.config)
    rho = mu0 @ absorption_matrix(chain, S)
    return rho / rho.sum()


@dataclass(frozen=True)
class HittingReport:
    value: float
    witness_set: tuple
    witness_state: int
    alpha: float | None  # None means unrestricted (the product functional)
    exact: bool
    kind: str = "t_hit_alpha"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["witness_set"] = list(self.witness_set)
        d["alpha"] = "unrestricted" if self.alpha is None else self.alpha
        return d


class SubsetTable:
    """``E_x[H_A]`` for every nonempty ``A`` (rows) and start ``x`` (columns).

    Rows are indexed by bitmask minus one: row ``m - 1`` is the set whose
    members are the set bits of ``m``.
    """

    def __init__(self, chain: MarkovChain):
        n = chain.n
        self.n = n
        masks = np.arange(1, 2 ** n, dtype=np.int64)
        self.masks = masks
        self.members = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
        self.mass = self.members.astype(float) @ chain.pi
        H = np.zeros((masks.size, n))
        G = _generator(chain)
        comp_size = n - self.members.sum(axis=1)
        for k in range(1, n):
            rows = np.nonzero(comp_size == k)[0]
            if rows.size == 0:
                continue
            B = np.nonzero(~self.members[rows])[1].reshape(rows.size, k)
            blocks = -G[B[:, :, None], B[:, None, :]]
            sol = _solve(blocks, np.ones((rows.size, k, 1)), "subset table")[..., 0]
            H[rows[:, None], B] = sol
        if H.min() < -1e-9 * max(1.0, H.max()):
            raise errors.SolverFailure("negative hitting time in subset table")
        self.hitting = np.clip(H, 0.0, None)

    def sets(self, rows: Iterable[int]):
        for r in rows:
            yield tuple(np.nonzero(self.members[r])[0].tolist())

    def set_of(self, row: int) -> tuple:
        return tuple(np.nonzero(self.members[row])[0].tolist())


_TABLES: "weakref.WeakKeyDictionary[MarkovChain, SubsetTable]" = weakref.WeakKeyDictionary()


def subset_table(chain: MarkovChain, max_exact: int | None = None) -> SubsetTable:
    cap = chain.config.max_exact if max_exact is None else max_exact
    if chain.n > cap:
        raise errors.TooLargeForExact(
            f"n = {chain.n} exceeds the exact-enumeration cap {cap}; use heuristic mode")
    table = _TABLES.get(chain)
    if table is None:
        table = _TABLES[chain] = SubsetTable(chain)
    return table


def _pick(values: np.ndarray, sets: Sequence[tuple], states: np.ndarray):
    """Arg-max with ties broken by smallest set (lexicographic), then state."""
    best = values.max()
    near = np.nonzero(values >= best - _TIE_TOL * max(1.0, abs(best)))[0]
    i = min(near, key=lambda j: (sets[j], states[j]))
    return float(values[i]), sets[i], int(states[i])


def _check_alpha(alpha):
    if not (0 < alpha <= 1):
        raise errors.BadAlpha(f"alpha must lie in (0, 1], got {alpha}")


def _best_start(h: np.ndarray) -> int:
    top = h.max()
    return int(np.nonzero(h >= top - _TIE_TOL * max(1.0, top))[0][0])


def t_hit_alpha(chain: MarkovChain, alpha: float, *, heuristic: bool = False,
                max_exact: int | None = None, candidate_sets=None,
                restarts: int = 8, seed: int = 0) -> HittingReport:
    """Largest ``E_x[H_A]`` over states ``x`` and sets with ``pi(A) >= alpha``.

    ``candidate_sets`` replaces full enumeration by an explicit list, for
    example one representative per orbit of a symmetry group; the report is
    marked exact because the caller vouches for coverage.
    """
    _check_alpha(alpha)
    pi = chain.pi
    if candidate_sets is not None:
        sets, vals, states = [], [], []
        for A in candidate_sets:
            A = tuple(sorted(int(a) for a in A))
            if pi[list(A)].sum() < alpha - _MASS_TOL:
                continue
            h = expected_hitting(chain, A)
            x = _best_start(h)
            sets.append(A), vals.append(h[x]), states.append(x)
        if not sets:
            raise errors.MarkovError("no candidate set meets the mass constraint")
        v, A, x = _pick(np.array(vals), sets, np.array(states))
        return HittingReport(v, A, x, alpha, exact=True)
    cap = chain.config.max_exact if max_exact is None else max_exact
    if chain.n > cap:
        if not heuristic:
            raise errors.TooLargeForExact(
                f"n = {chain.n} exceeds the exact-enumeration cap {cap}; enable heuristic mode (--heuristic)")
        return _greedy(chain, alpha, restarts, seed)
    table = subset_table(chain, cap)
    rows = np.nonzero(table.mass >= alpha - _MASS_TOL)[0]
    H = table.hitting[rows]
    states = H.argmax(axis=1)
    vals = H[np.arange(rows.size), states]
    v, A, x = _pick(vals, list(table.sets(rows)), states)
    # first maximizing state within tolerance for the chosen set
    x = _best_start(expected_hitting(chain, A))
    return HittingReport(v, A, x, alpha, exact=True)


def t_hit_product(chain: MarkovChain, max_exact: int | None = None) -> HittingReport:
    """Largest ``pi(A) E_x[H_A]`` over all nonempty sets and starts."""
    table = subset_table(chain, max_exact)
    W = table.mass[:, None] * table.hitting
    states = W.argmax(axis=1)
    vals = W[np.arange(W.shape[0]), states]
    v, A, _ = _pick(vals, list(table.sets(range(W.shape[0]))), states)
    x = _best_start(chain.pi[list(A)].sum() * expected_hitting(chain, A))
    return HittingReport(v, A, x, None, exact=True, kind="t_hit_product")


def _greedy(chain: MarkovChain, alpha: float, restarts: int, seed: int) -> HittingReport:
    """Shrink the target set while the mass allows, keeping the hardest sets.

    Removing states never shortens hitting times, so every run ends at a
    set that is minimal for the mass constraint.  Restart 0 is fully greedy;
    the others pick at random among the three best removals.
    """
    pi = chain.pi
    rng = np.random.default_rng(seed)
    best = (0.0, tuple(range(chain.n)), 0)
    for r in range(max(1, restarts)):
        A = list(range(chain.n))
        while len(A) > 1:
            options = []
            for a in A:
                rest = [b for b in A if b != a]
                if pi[rest].sum() >= alpha - _MASS_TOL:
                    options.append((expected_hitting(chain, rest).max(), a))
            if not options:
                break
            options.sort(key=lambda o: (-o[0], o[1]))
            pick = options[0] if r == 0 else options[rng.integers(min(3, len(options)))]
            A.remove(pick[1])
        h = expected_hitting(chain, A)
        x = _best_start(h)
        if h[x] > best[0] or (h[x] == best[0] and tuple(A) < best[1]):
            best = (float(h[x]), tuple(A), x)
    return HittingReport(best[0], best[1], best[2], alpha, exact=False)
