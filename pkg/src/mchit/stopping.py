"""A randomized stationary stopping time built from a random nested set.

Given an initial law ``mu0``, the construction orders the states
``a_1, ..., a_n`` and picks weights ``p_1, ..., p_n`` so that, with
``A_i = E minus {a_1, ..., a_{i-1}}`` and ``A`` drawn as ``A_i`` with
probability ``p_i`` independently of the path, the position at the hitting
time ``T = H_A`` is exactly stationary.  At each step the residual
``r(a) = target(a) - sum_{j<=k} p_j rho_{A_j}(a)`` is kept nonnegative by
choosing the smallest weight that zeroes one of the remaining residuals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import errors
from .chain import MarkovChain, check_distribution
from .hitting import (expected_hitting, harmonic_measure, hit_survival,
                      t_hit_alpha, t_hit_product)
from .records import VerifyRecord, record

_TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class StoppingRule:
    mu0: np.ndarray
    ordering: tuple
    probs: np.ndarray
    harmonics: np.ndarray  # row i is the entrance law on A_i
    target: np.ndarray
    chain_fingerprint: str
    residual_floor: tuple = field(default=())  # min residual after each step

    @property
    def n(self) -> int:
        return len(self.ordering)

    @property
    def sets(self) -> list[tuple]:
        return [tuple(sorted(self.ordering[i:])) for i in range(self.n)]

    @property
    def set_masks(self) -> np.ndarray:
        """``masks[i, a]`` is True iff state ``a`` belongs to ``A_i``."""
        m = np.zeros((self.n, self.n), dtype=bool)
        for i in range(self.n):
            m[i, list(self.ordering[i:])] = True
        return m

    @property
    def halting_state(self) -> int:
        return self.ordering[-1]

    def law(self) -> np.ndarray:
        return self.probs @ self.harmonics

    def diagnostics(self) -> dict:
        law = self.law()
        cum = np.cumsum(self.probs)
        mass_after = np.array([self.target[list(self.ordering[k + 1:])].sum()
                               for k in range(self.n)])
        return {
            "prob_sum": float(self.probs.sum()),
            "stationarity_residual": float(np.abs(law - self.target).max()),
            "min_partial_sum_slack": float((cum - (1.0 - mass_after)).min()),
            "min_step_residual": float(min(self.residual_floor)) if self.residual_floor else 0.0,
        }

    def to_dict(self) -> dict:
        return {
            "mu0": self.mu0.tolist(),
            "target": self.target.tolist(),
            "ordering": list(self.ordering),
            "probs": self.probs.tolist(),
            "chain_fingerprint": self.chain_fingerprint,
            "diagnostics": self.diagnostics(),
        }


def build_rule(chain: MarkovChain, mu0, target=None) -> StoppingRule:
    """Run the nested-set construction for initial law ``mu0``.

    ``target`` defaults to the stationary distribution.  Ties in the
    minimizing state go to the smallest index.
    """
    cfg = chain.config
    n = chain.n
    mu0 = check_distribution(mu0, n, cfg)
    target = chain.pi.copy() if target is None else check_distribution(target, n, cfg)
    residual = target.copy()
    remaining = list(range(n))
    ordering, probs, harmonics, floors = [], [], [], []
    for _ in range(n):
        rho = harmonic_measure(chain, mu0, remaining)
        cand = [a for a in remaining if rho[a] > 0]
        if not cand:
            raise errors.ConstructionFailure("harmonic measure has no mass on the remaining set")
        ratios = np.array([residual[a] / rho[a] for a in cand])
        best = ratios.min()
        pick = next(i for i, r in enumerate(ratios) if r <= best + _TIE_TOL * max(1.0, best))
        a, p = cand[pick], float(max(best, 0.0))
        residual = residual - p * rho
        residual[a] = 0.0
        low = residual[remaining].min()
        floors.append(float(low))
        if low < -cfg.residual:
            raise errors.ConstructionFailure(
                f"residual {low:.3e} below tolerance after choosing state {a}")
        residual = np.where((residual < 0) & (residual >= -cfg.residual), 0.0, residual)
        ordering.append(a)
        probs.append(p)
        harmonics.append(rho)
        remaining.remove(a)
    rule = StoppingRule(mu0=mu0, ordering=tuple(ordering), probs=np.array(probs),
                        harmonics=np.array(harmonics), target=target,
                        chain_fingerprint=chain.fingerprint, residual_floor=tuple(floors))
    if abs(rule.probs.sum() - 1.0) > cfg.residual:
        raise errors.ConstructionFailure(f"weights sum to {rule.probs.sum()!r}")
    return rule


def rule_from_dict(chain: MarkovChain, data: dict) -> StoppingRule:
    """Rebuild a stored rule; entrance laws are recomputed from the chain."""
    if data.get("chain_fingerprint") not in (None, chain.fingerprint):
        raise errors.ChainMismatch("rule was built for a different chain")
    mu0 = check_distribution(data["mu0"], chain.n, chain.config)
    ordering = tuple(int(a) for a in data["ordering"])
    if sorted(ordering) != list(range(chain.n)):
        raise errors.ChainMismatch("rule ordering is not a permutation of the states")
    harmonics = np.array([harmonic_measure(chain, mu0, ordering[i:]) for i in range(chain.n)])
    target = np.asarray(data.get("target", chain.pi), dtype=float)
    return StoppingRule(mu0=mu0, ordering=ordering, probs=np.asarray(data["probs"], dtype=float),
                        harmonics=harmonics, target=target, chain_fingerprint=chain.fingerprint)


def _check_chain(chain: MarkovChain, rule: StoppingRule):
    if rule.chain_fingerprint != chain.fingerprint:
        raise errors.ChainMismatch("rule was built for a different chain")


def rule_law(chain: MarkovChain, rule: StoppingRule) -> np.ndarray:
    """Law of ``X_T``."""
    _check_chain(chain, rule)
    return rule.law()


def rule_mean(chain: MarkovChain, rule: StoppingRule) -> float:
    """``E[T] = sum_i p_i E_mu0[H_{A_i}]``."""
    _check_chain(chain, rule)
    return float(sum(p * (rule.mu0 @ expected_hitting(chain, A))
                     for p, A in zip(rule.probs, rule.sets) if p > 0))


def rule_tail(chain: MarkovChain, rule: StoppingRule, t) -> float:
    """``P[T > t] = sum_i p_i P_mu0[H_{A_i} > t]``."""
    _check_chain(chain, rule)
    total = sum(p * hit_survival(chain, rule.mu0, A, t)
                for p, A in zip(rule.probs, rule.sets) if p > 0)
    return float(min(max(total, 0.0), 1.0))


def check_tail_bound(chain: MarkovChain, rule: StoppingRule, eps_grid, t_grid,
                     name: str = "chain", max_exact: int | None = None) -> list[VerifyRecord]:
    """Check ``P[T > t] <= eps + T_hit(eps)/t`` and ``P[T > t] <= sqrt(T_hit/t)``.

    ``T_hit`` here is the product functional ``max pi(A) E_x[H_A]``.
    """
    _check_chain(chain, rule)
    if not np.allclose(rule.target, chain.pi, atol=chain.config.dist_sum):
        raise errors.MarkovError("tail bounds are stated for stationary targets only")
    tails = {t: rule_tail(chain, rule, t) for t in t_grid}
    product = t_hit_product(chain, max_exact).value
    out = []
    for eps in eps_grid:
        th = t_hit_alpha(chain, eps, max_exact=max_exact).value
        for t in t_grid:
            out.append(record("rule-tail-eps", name, tails[t], eps + th / t,
                              "P[T>t] <= eps + T_hit(eps)/t", eps=eps, t=t, t_hit_eps=th))
    for t in t_grid:
        out.append(record("rule-tail-sqrt", name, tails[t], math.sqrt(product / t),
                          "P[T>t] <= sqrt(T_hit/t)", t=t, t_hit=product))
    return out


def check_halting_state(chain: MarkovChain, rule: StoppingRule, seed: int = 0,
                        paths: int = 10_000, name: str = "chain") -> VerifyRecord:
    """The last state of the ordering lies in every ``A_i``, so ``T`` never
    exceeds its first visit time; checked structurally and on sampled paths."""
    from .montecarlo import sample_rule_stop_with_halting

    _check_chain(chain, rule)
    h = rule.halting_state
    structural = all(h in A for A in rule.sets)
    stops, first_visit = sample_rule_stop_with_halting(chain, rule, paths, seed)
    excess = float(np.max(stops - first_visit)) if paths else 0.0
    lhs = excess if structural else math.inf
    return record("halting-state", name, lhs, 0.0,
                  "T <= first visit of the halting state", halting_state=int(h),
                  paths=int(paths), seed=int(seed), structural=structural)
