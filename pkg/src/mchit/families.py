"""Generators for standard chains.

Graph families produce the random walk on the graph: in continuous mode
each state leaves at total rate 1, spread evenly over its neighbours; in
discrete mode the simple random walk.  Pass ``lazy=True`` (discrete only)
for ``(I + P)/2``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import errors
from .chain import CONTINUOUS, DISCRETE, MarkovChain, lazify, validate_chain
from .config import DEFAULT, Config

NAMES = ("complete", "cycle", "biased-cycle", "two-cliques", "hypercube",
         "birth-death", "bipartite-plus-edge", "random")

# admissible size parameter per family (inclusive)
SIZE_RANGE = {
    "complete": (2, 64),
    "cycle": (2, 256),
    "biased-cycle": (3, 256),
    "two-cliques": (2, 64),
    "hypercube": (1, 8),
    "birth-death": (2, 256),
    "bipartite-plus-edge": (2, 32),
    "random": (2, 64),
}


@dataclass(frozen=True)
class FamilySpec:
    name: str
    n: int
    mode: str = CONTINUOUS
    params: dict = field(default_factory=dict)
    seed: int | None = None
    lazy: bool = False


def _walk(adj: np.ndarray, mode: str) -> np.ndarray:
    deg = adj.sum(axis=1)
    W = adj / deg[:, None]
    if mode == CONTINUOUS:
        return W - np.diag(W.sum(axis=1))
    return W


def _complete(n):
    return np.ones((n, n)) - np.eye(n)


def _cycle(n):
    A = np.zeros((n, n))
    for i in range(n):
        A[i, (i + 1) % n] = A[i, (i - 1) % n] = 1.0
    return A


def two_cliques_adjacency(n: int) -> np.ndarray:
    """``K_n`` on ``0..n-1`` and on ``n..2n-1`` joined by the edge ``(n-1, n)``."""
    A = np.zeros((2 * n, 2 * n))
    A[:n, :n] = _complete(n)
    A[n:, n:] = _complete(n)
    A[n - 1, n] = A[n, n - 1] = 1.0
    return A


def _hypercube(d):
    size = 2 ** d
    A = np.zeros((size, size))
    for x in range(size):
        for b in range(d):
            A[x, x ^ (1 << b)] = 1.0
    return A


def _bipartite_plus_edge(m):
    # parts 0..m-1 and m..2m-1, plus the edge (0, 1) inside the first part
    A = np.zeros((2 * m, 2 * m))
    A[:m, m:] = 1.0
    A[m:, :m] = 1.0
    A[0, 1] = A[1, 0] = 1.0
    return A


def _biased_cycle(n, mode, cw, ccw):
    M = np.zeros((n, n))
    for i in range(n):
        M[i, (i + 1) % n] += cw
        M[i, (i - 1) % n] += ccw
    if mode == CONTINUOUS:
        return M - np.diag(M.sum(axis=1))
    return M / M.sum(axis=1, keepdims=True)


def _birth_death(n, mode, up):
    M = np.zeros((n, n))
    for i in range(n - 1):
        M[i, i + 1] = up
        M[i + 1, i] = 1.0 - up
    if mode == CONTINUOUS:
        return M - np.diag(M.sum(axis=1))
    return M + np.diag(1.0 - M.sum(axis=1))


def _random(n, mode, seed, sparsity):
    """Exit rates uniform on [0.5, 1.5], each edge kept with probability
    ``1 - sparsity``, resampled until irreducible.  The discrete version is
    the uniformized skeleton ``I + Q / 1.5``."""
    rng = np.random.default_rng(seed)
    while True:
        keep = rng.random((n, n)) >= sparsity
        np.fill_diagonal(keep, False)
        if not keep.any(axis=1).all():
            continue
        ncomp, _ = connected_components(keep, directed=True, connection="strong")
        if ncomp == 1:
            break
    W = rng.random((n, n)) * keep
    W /= W.sum(axis=1, keepdims=True)
    W *= rng.uniform(0.5, 1.5, size=n)[:, None]
    Q = W - np.diag(W.sum(axis=1))
    if mode == CONTINUOUS:
        return Q
    P = np.eye(n) + Q / 1.5
    return P / P.sum(axis=1, keepdims=True)


def make_family(spec: FamilySpec, config: Config = DEFAULT) -> MarkovChain:
    name, n, mode, p = spec.name, spec.n, spec.mode, spec.params
    if name not in NAMES:
        raise errors.UnknownFamily(f"unknown family {name!r}; choose from {NAMES}")
    if mode not in (CONTINUOUS, DISCRETE):
        raise errors.ChainError(f"unknown mode {mode!r}")
    lo, hi = SIZE_RANGE[name]
    if not (isinstance(n, (int, np.integer)) and lo <= n <= hi):
        raise errors.BadSize(f"{name} needs {lo} <= n <= {hi}, got {n}")
    if name == "complete":
        M = _walk(_complete(n), mode)
    elif name == "cycle":
        M = _walk(_cycle(n), mode) if n > 2 else _walk(_complete(2), mode)
    elif name == "biased-cycle":
        M = _biased_cycle(n, mode, float(p.get("cw", 2.0)), float(p.get("ccw", 1.0)))
    elif name == "two-cliques":
        M = _walk(two_cliques_adjacency(n), mode)
    elif name == "hypercube":
        M = _walk(_hypercube(n), mode)
    elif name == "birth-death":
        up = float(p.get("up", 0.5))
        if not 0 < up < 1:
            raise errors.BadSize(f"birth-death needs 0 < up < 1, got {up}")
        M = _birth_death(n, mode, up)
    elif name == "bipartite-plus-edge":
        M = _walk(_bipartite_plus_edge(n), mode)
    else:
        M = _random(n, mode, 0 if spec.seed is None else spec.seed,
                    float(p.get("sparsity", 0.5)))
    chain = validate_chain({"mode": mode, "matrix": M}, config)
    if spec.lazy:
        chain = lazify(chain)
    return chain


def family(name: str, n: int, mode: str = CONTINUOUS, seed: int | None = None,
           lazy: bool = False, config: Config = DEFAULT, **params) -> MarkovChain:
    return make_family(FamilySpec(name, n, mode, params, seed, lazy), config)


def two_cliques_orbit_sets(n: int):
    """One target set per orbit of the two-cliques automorphism group.

    Inside each clique the ``n - 1`` non-bridge vertices are interchangeable,
    so a set is determined up to symmetry by whether it holds each bridge
    endpoint and how many non-bridge vertices of each clique it holds.
    Worst-case hitting functionals are symmetry invariant, hence maximizing
    over these representatives equals maximizing over all sets.
    """
    left_bulk = list(range(n - 1))
    right_bulk = list(range(n + 1, 2 * n))
    for bl, kl, br, kr in itertools.product((0, 1), range(n), (0, 1), range(n)):
        A = left_bulk[:kl] + right_bulk[:kr]
        if bl:
            A.append(n - 1)
        if br:
            A.append(n)
        if A:
            yield tuple(sorted(A))
