"""Chain-by-chain certification of the inequalities relating mixing times,
hitting times of large sets, and the nested-set stopping rule.

Every check returns :class:`~mchit.records.VerifyRecord` objects
(``lhs <= rhs`` up to the record tolerance).  Explicit constants:

* stopping-rule tail:       P[T > t] <= eps + T_hit(eps)/t,  P[T > t] <= sqrt(T_hit/t)
* uniform-average coupling: horizon t(a) = 64 T_hit(a) / (1-2a)^2, pairwise
  distance of averaged rows <= (1+2a)/2; for t >= T_hit(a) the pairwise
  distance is <= 2a + 4 sqrt(T_hit(a)/t) (+ 2/t in discrete time, where the
  uniform offset lives on a lattice)
* reversible chains:        L = 8 T_hit(a)/(1-2a), U = [8/(1-2a) + (8/(1-2a))^2] T_hit(a),
  d_bar(U) <= sqrt((1+2a)/2)
* lower bound:              with t* an averaged-mixing witness at level a/2,
  P_x[H_A >= t*] <= 1 - a/2 and E_x[H_A] <= (2/a) t* whenever pi(A) >= a

The averaged mixing time (infimum over all averaging measures) is replaced by
the uniform-measure time from :func:`~mchit.mixing.cesaro_mixing_time`.  That
time upper-bounds the infimum, so it is only ever used where a larger value
makes the asserted inequality weaker, never stronger than what is proven.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import errors
from .chain import MarkovChain, from_matrix, is_lazy, is_reversible, point_mass
from .families import family, two_cliques_orbit_sets
from .hitting import _survival_block, subset_table, t_hit_alpha
from .mixing import (cesaro_kernel, cesaro_mixing_time, check_submultiplicativity,
                     d_bar, mixing_time, _pairwise)
from .records import VerifyRecord, canonical, record
from .stopping import build_rule, check_halting_state, check_tail_bound

DEFAULT_ALPHAS = (0.1, 0.25, 0.4)
DEFAULT_EPS = (0.1, 0.3, 0.5, 0.7, 0.9)
COUNTEREXAMPLE_SIZES = (6, 10, 14)


# -- explicit constants ------------------------------------------------------

def pairwise_horizon(alpha: float, t_hit: float) -> float:
    return 64.0 * t_hit / (1.0 - 2.0 * alpha) ** 2


def reversible_horizons(alpha: float, t_hit: float) -> tuple[float, float]:
    g = 8.0 / (1.0 - 2.0 * alpha)
    return g * t_hit, (g + g * g) * t_hit


def amplification_steps(level: float, goal: float = 0.25) -> int:
    """Smallest k with level**k <= goal."""
    return math.ceil(math.log(goal) / math.log(level))


def upper_constant(alpha: float) -> float:
    """T_mix(1/4) <= upper_constant(a) T_hit(a) for reversible continuous chains:
    d_bar(U) <= sqrt((1+2a)/2), then submultiplicativity k times."""
    _, U = reversible_horizons(alpha, 1.0)
    return amplification_steps(math.sqrt((1 + 2 * alpha) / 2)) * U


def lower_constant(alpha: float) -> float:
    """T_hit(a) <= lower_constant(a) T_rmix(1/4): the (2/a) mean bound at level
    a/2, with T_rmix(a/2) <= (log2(2/a) + 1) T_rmix(1/4)."""
    return (2.0 / alpha) * (math.log2(2.0 / alpha) + 1.0)


def _check_alpha(alpha, hi=0.5):
    if not (0 < alpha < hi):
        raise errors.BadAlpha(f"alpha must lie in (0, {hi}), got {alpha}")


def _horizon(chain: MarkovChain, t: float):
    return t if chain.continuous else max(1, math.ceil(t))


# -- checks --------------------------------------------------------------------

def verify_tail_bounds(chain: MarkovChain, mu0, eps_grid=DEFAULT_EPS, t_grid=None,
                       name: str = "chain") -> list[VerifyRecord]:
    """Tail bounds of the stopping rule built for ``mu0``.

    The default time grid is ``T_hit(1/2) * (1/4, 1, 4, 16, 64)``.
    """
    rule = build_rule(chain, mu0)
    if t_grid is None:
        scale = max(t_hit_alpha(chain, 0.5).value, 1e-3)
        t_grid = [_horizon(chain, scale * f) for f in (0.25, 1, 4, 16, 64)]
    return check_tail_bound(chain, rule, eps_grid, t_grid, name=name)


def verify_pairwise_average(chain: MarkovChain, alpha: float, name: str = "chain",
                            multipliers=(1, 4, 16, 64)) -> list[VerifyRecord]:
    """Pairwise distance of uniformly time-averaged rows, any chain."""
    _check_alpha(alpha)
    th = t_hit_alpha(chain, alpha).value
    t_a = _horizon(chain, pairwise_horizon(alpha, th))
    C = cesaro_kernel(chain, t_a)
    D = 0.5 * np.abs(C[:, None, :] - C[None, :, :]).sum(axis=-1)
    bound = (1 + 2 * alpha) / 2
    out = [record("cesaro-pair-t-alpha", name, D[x, z], bound,
                  "uniform-average pairwise distance at 64 T_hit(a)/(1-2a)^2 <= (1+2a)/2",
                  alpha=alpha, t=t_a, t_hit=th, x=x, z=z)
           for x in range(chain.n) for z in range(chain.n) if x != z]
    for f in multipliers:
        t = _horizon(chain, f * th)
        rhs = 2 * alpha + 4 * math.sqrt(th / t) + (0.0 if chain.continuous else 2.0 / t)
        out.append(record("cesaro-pair-intermediate", name, _pairwise(cesaro_kernel(chain, t)),
                          rhs, "uniform-average pairwise distance <= 2a + 4 sqrt(T_hit(a)/t)",
                          alpha=alpha, t=t, t_hit=th))
    return out


def verify_reversible_contraction(chain: MarkovChain, alpha: float,
                                  name: str = "chain") -> list[VerifyRecord]:
    """``d_bar(U) <= sqrt((1+2a)/2)`` for reversible chains.

    Discrete chains must be lazy; ``U`` is rounded up to an integer.
    """
    _check_alpha(alpha)
    if not is_reversible(chain):
        raise errors.NotReversible(f"{name} is not reversible")
    if not chain.continuous and not is_lazy(chain):
        raise errors.NotLazy(f"{name}: discrete chain needs holding probability >= 1/2")
    th = t_hit_alpha(chain, alpha).value
    L, U = reversible_horizons(alpha, th)
    U = _horizon(chain, U)
    return [record("dbar-at-U", name, d_bar(chain, U), math.sqrt((1 + 2 * alpha) / 2),
                   "d_bar(U) <= sqrt((1+2a)/2)", alpha=alpha, t_hit=th, L=L, U=U)]


def verify_hitting_lower_bound(chain: MarkovChain, alpha: float, name: str = "chain",
                               per_state: bool = False) -> list[VerifyRecord]:
    """Lower-bound chain: tail and mean of hitting times of large sets against
    the uniform-average mixing witness ``t*`` at level ``a/2``.

    One record per set (worst start state) unless ``per_state``.
    """
    _check_alpha(alpha, hi=1.0)
    table = subset_table(chain)
    t_star = cesaro_mixing_time(chain, alpha / 2).time
    rows = np.nonzero(table.mass >= alpha - 1e-12)[0]
    n = chain.n
    # P_x[H_A >= t*]: continuous laws have no atom at t* > 0 off A;
    # discrete: P[H >= t*] = P[H > t* - 1]
    t_surv = t_star if chain.continuous else t_star - 1
    tail = np.zeros((rows.size, n))
    comp = n - table.members[rows].sum(axis=1)
    for k in range(1, n):
        sel = np.nonzero(comp == k)[0]
        if sel.size == 0:
            continue
        B = np.nonzero(~table.members[rows[sel]])[1].reshape(sel.size, k)
        if t_surv <= 0:
            tail[sel[:, None], B] = 1.0
        else:
            tail[sel[:, None], B] = _survival_block(chain, B, t_surv)
    means = table.hitting[rows]
    tail_bound = 1 - alpha / 2
    mean_bound = (2 / alpha) * t_star
    out = []
    for i, r in enumerate(rows):
        A = list(table.set_of(r))
        states = range(n) if per_state else [int(tail[i].argmax())]
        for x in states:
            out.append(record("lower-tail-hit", name, tail[i, x], tail_bound,
                              "P_x[H_A >= t*] <= 1 - a/2", alpha=alpha, t_star=t_star, A=A, x=x))
        states = range(n) if per_state else [int(means[i].argmax())]
        for x in states:
            out.append(record("lower-mean-hit", name, means[i, x], mean_bound,
                              "E_x[H_A] <= (2/a) t*", alpha=alpha, t_star=t_star, A=A, x=x))
    th = t_hit_alpha(chain, alpha).value
    out.append(record("lower-thit-2-over-alpha", name, th, mean_bound,
                      "T_hit(a) <= (2/a) t*", alpha=alpha, t_star=t_star))
    return out


def two_cliques_point(n: int, alpha: float = 0.6, delta: float = 0.25) -> dict:
    chain = family("two-cliques", n)
    th = t_hit_alpha(chain, alpha, candidate_sets=two_cliques_orbit_sets(n)).value
    tm = mixing_time(chain, delta).time
    return {"n": n, "t_hit": th, "t_mix": tm, "ratio": tm / th}


def verify_counterexample(n_list=COUNTEREXAMPLE_SIZES, alpha: float = 0.6,
                          delta: float = 0.25, factor: float = 1.3,
                          workers: int = 1) -> list[VerifyRecord]:
    """Two cliques joined by one edge: ``T_mix/T_hit(a)`` must grow with the
    clique size when ``a > 1/2``.  Below 1/2 the records are informational."""
    n_list = list(n_list)
    if not n_list or any(n < 2 for n in n_list) or n_list != sorted(set(n_list)):
        raise errors.BadSizes(f"sizes must be distinct, increasing and >= 2: {n_list}")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        points = list(pool.map(lambda n: two_cliques_point(n, alpha, delta), n_list))
    must = alpha > 0.5
    return [record("counterexample-growth", f"two-cliques-{b['n']}",
                   factor * a["ratio"], b["ratio"],
                   "T_mix/T_hit(a) grows along the size list", must_pass=must,
                   alpha=alpha, delta=delta, factor=factor,
                   n_prev=a["n"], n=b["n"], ratio_prev=a["ratio"], ratio=b["ratio"],
                   t_hit=b["t_hit"], t_mix=b["t_mix"])
            for a, b in zip(points, points[1:])]


def empirical_constants(suite, alpha_grid=DEFAULT_ALPHAS):
    """Observed ratios ``T_mix(1/4)/T_hit(a)`` and ``T_ces(1/4)/T_hit(a)``.

    Returns ``(report, records)``.  Lower bound ``1/lower_constant(a)`` is
    asserted for both columns; the upper constant for the plain column only
    on reversible continuous chains (where it is derived).  For the averaged
    column the derived upper statement is at level (1+2a)/2:
    ``T_ces((1+2a)/2) <= 64/(1-2a)^2 T_hit(a)``.
    """
    rows, recs = [], []
    for name, chain in suite:
        t_mix = mixing_time(chain, 0.25).time
        t_ces = cesaro_mixing_time(chain, 0.25).time
        plain_ok = chain.continuous and is_reversible(chain)
        for a in alpha_grid:
            th = t_hit_alpha(chain, a).value
            lo, hi = 1.0 / lower_constant(a), upper_constant(a)
            rows.append({"chain": name, "alpha": a, "t_hit": th, "t_mix": t_mix,
                         "t_ces": t_ces, "plain_ratio": t_mix / th, "ces_ratio": t_ces / th,
                         "plain_upper_applies": plain_ok})
            recs.append(record("constants-ces-lower", name, lo, t_ces / th,
                               "T_ces(1/4)/T_hit(a) >= 1/c_low(a)", alpha=a))
            recs.append(record("constants-plain-lower", name, lo, t_mix / th,
                               "T_mix(1/4)/T_hit(a) >= 1/c_low(a)", alpha=a))
            if plain_ok:
                recs.append(record("constants-plain-upper", name, t_mix / th, hi,
                                   "T_mix(1/4)/T_hit(a) <= c_up(a)", alpha=a))
            level = (1 + 2 * a) / 2
            t_lvl = cesaro_mixing_time(chain, level).time
            recs.append(record("constants-ces-upper", name, t_lvl,
                               _horizon(chain, pairwise_horizon(a, th)),
                               "T_ces((1+2a)/2) <= 64 T_hit(a)/(1-2a)^2", alpha=a))
    summary = {}
    for a in alpha_grid:
        sel = [r for r in rows if r["alpha"] == a]
        plain = [r["plain_ratio"] for r in sel if r["plain_upper_applies"]]
        summary[str(a)] = {
            "c_low": lower_constant(a),
            "c_up": upper_constant(a),
            "plain_ratio_min": min(plain) if plain else None,
            "plain_ratio_max": max(plain) if plain else None,
            "ces_ratio_min": min(r["ces_ratio"] for r in sel),
            "ces_ratio_max": max(r["ces_ratio"] for r in sel),
        }
    return {"rows": rows, "summary": summary}, recs


# -- suites --------------------------------------------------------------------

def default_suite():
    """Named chains, all with at most 12 states."""
    return [
        ("C2", from_matrix([[-1.0, 1.0], [2.0, -2.0]])),
        ("cycle-5", family("cycle", 5)),
        ("biased-cycle-3", family("biased-cycle", 3)),
        ("complete-6", family("complete", 6)),
        ("two-cliques-4", family("two-cliques", 4)),
        ("hypercube-3", family("hypercube", 3)),
        ("birth-death-6", family("birth-death", 6, up=0.7)),
        ("bipartite-plus-edge-3", family("bipartite-plus-edge", 3)),
        ("random-6-s7", family("random", 6, seed=7)),
        ("random-9-s3", family("random", 9, seed=3)),
        ("lazy-cycle-6", family("cycle", 6, mode="discrete", lazy=True)),
        ("lazy-hypercube-3", family("hypercube", 3, mode="discrete", lazy=True)),
        ("lazy-birth-death-5", family("birth-death", 5, mode="discrete", lazy=True, up=0.4)),
        ("random-d-7-s11", family("random", 7, mode="discrete", seed=11)),
    ]


def random_suite(count: int = 50, base_seed: int = 1000):
    """``count`` random chains cycling through sizes 3..12 in both modes."""
    out = []
    for i in range(count):
        n = 3 + (i // 2) % 10
        mode = "continuous" if i % 2 == 0 else "discrete"
        seed = base_seed + i
        out.append((f"random-{mode[0]}-{n}-s{seed}", family("random", n, mode=mode, seed=seed)))
    return out


def _chain_records(name: str, chain: MarkovChain, alphas, halting_paths: int):
    recs = []
    for x in sorted({0, chain.n - 1}):
        recs += verify_tail_bounds(chain, point_mass(chain.n, x), name=f"{name}@{x}")
        rule = build_rule(chain, point_mass(chain.n, x))
        if halting_paths:
            recs.append(check_halting_state(chain, rule, seed=x, paths=halting_paths,
                                            name=f"{name}@{x}"))
    reversible = is_reversible(chain) and (chain.continuous or is_lazy(chain))
    for a in alphas:
        recs += verify_pairwise_average(chain, a, name=name)
        if reversible:
            recs += verify_reversible_contraction(chain, a, name=name)
    for a in (0.2, 0.4):
        recs += verify_hitting_lower_bound(chain, a, name=name)
    th = t_hit_alpha(chain, 0.25).value
    grid = [_horizon(chain, th * f) for f in (0.1, 0.3, 1, 3, 10)]
    recs += check_submultiplicativity(chain, grid, grid, name=name)
    return recs


def run_suite(suite: str = "default", alphas=DEFAULT_ALPHAS, workers: int = 1,
              halting_paths: int = 2000, counterexample=COUNTEREXAMPLE_SIZES,
              constants: bool = True):
    """All checks over a named suite.  Returns ``(records, report)``."""
    chains = {"default": default_suite, "random": random_suite}
    if suite not in chains:
        raise errors.MarkovError(f"unknown suite {suite!r}; choose from {sorted(chains)}")
    members = chains[suite]()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        parts = list(pool.map(lambda nc: _chain_records(*nc, alphas, halting_paths), members))
    recs = [r for part in parts for r in part]
    report = {"suite": suite, "chains": [name for name, _ in members]}
    if counterexample:
        recs += verify_counterexample(counterexample, workers=workers)
    if constants:
        table, crec = empirical_constants(members, alphas)
        recs += crec
        report["constants"] = table["summary"]
    return canonical(recs), report
