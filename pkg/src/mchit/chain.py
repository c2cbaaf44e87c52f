"""Finite Markov chains in continuous or discrete time.

A chain is either a generator ``Q`` (continuous mode: nonnegative
off-diagonal rates, rows summing to zero) or a stochastic matrix ``P``
(discrete mode).  Chains are immutable; derived quantities such as the
stationary distribution are cached on first use.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import errors
from .config import DEFAULT, Config
from .uniformization import discrete_power, poisson_power_sum

CONTINUOUS = "continuous"
DISCRETE = "discrete"
MODES = (CONTINUOUS, DISCRETE)


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """Validated finite chain. Build through :func:`validate_chain`."""

    mode: str
    labels: tuple
    matrix: np.ndarray
    rate: float | None = None
    config: Config = field(default=DEFAULT, repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def continuous(self) -> bool:
        return self.mode == CONTINUOUS

    @cached_property
    def jump_matrix(self) -> np.ndarray:
        """One-step matrix of the uniformized chain: ``I + Q/rate`` or ``P``."""
        if self.continuous:
            M = np.eye(self.n) + self.matrix / self.rate
            M = np.clip(M, 0.0, None)
        else:
            M = self.matrix.copy()
        M.setflags(write=False)
        return M

    @cached_property
    def fingerprint(self) -> str:
        h = hashlib.sha1(self.mode.encode())
        h.update(np.ascontiguousarray(self.matrix).tobytes())
        return h.hexdigest()

    @cached_property
    def pi(self) -> np.ndarray:
        return stationary(self)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "labels": list(self.labels),
                "matrix": self.matrix.tolist()}

    def __repr__(self):
        return f"MarkovChain(mode={self.mode!r}, n={self.n})"


def validate_chain(spec, config: Config = DEFAULT) -> MarkovChain:
    """Check a raw chain description and return a :class:`MarkovChain`.

    ``spec`` is a mapping with keys ``mode``, ``matrix`` and optionally
    ``labels`` (the chain-file JSON layout).
    """
    try:
        mode = spec["mode"]
        raw = spec["matrix"]
    except (KeyError, TypeError) as exc:
        raise errors.ChainError(f"chain spec needs 'mode' and 'matrix': {exc}") from None
    if mode not in MODES:
        raise errors.ChainError(f"mode must be one of {MODES}, got {mode!r}")
    try:
        Q = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise errors.NonSquare(f"matrix is not a rectangular numeric array: {exc}") from None
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise errors.NonSquare(f"matrix must be square, got shape {Q.shape}")
    n = Q.shape[0]
    if n < 2:
        raise errors.NonSquare("a chain needs at least 2 states")
    if not np.all(np.isfinite(Q)):
        raise errors.ChainError("matrix has non-finite entries")
    labels = spec.get("labels") if hasattr(spec, "get") else None
    labels = tuple(range(n)) if labels is None else tuple(labels)
    if len(labels) != n or len(set(labels)) != n:
        raise errors.ChainError("labels must be n distinct names")

    off = ~np.eye(n, dtype=bool)
    for i in range(n):
        for j in range(n):
            if (off[i, j] or mode == DISCRETE) and Q[i, j] < 0:
                raise errors.NegativeRate(i, j, float(Q[i, j]))
            if mode == DISCRETE and Q[i, j] > 1 + config.row_sum:
                raise errors.ChainError(f"entry ({i}, {j}) = {Q[i, j]!r} exceeds 1")
    target = 0.0 if mode == CONTINUOUS else 1.0
    for i in range(n):
        total = float(Q[i].sum())
        scale = max(1.0, float(np.abs(Q[i]).max()))
        if abs(total - target) > config.row_sum * scale:
            raise errors.BadRowSum(i, total, target)

    adj = (Q * off) > 0
    _, comp = connected_components(adj, directed=True, connection="strong")
    if comp.max() > 0:
        bad = int(np.nonzero(comp != comp[0])[0][0])
        raise errors.Reducible(bad)

    rate = None
    if mode == CONTINUOUS:
        rate = config.rate_margin * float(np.max(-np.diag(Q)))
    Q.setflags(write=False)
    return MarkovChain(mode=mode, labels=labels, matrix=Q, rate=rate, config=config)


def from_matrix(matrix, mode: str = CONTINUOUS, labels: Sequence | None = None,
                config: Config = DEFAULT) -> MarkovChain:
    return validate_chain({"mode": mode, "matrix": matrix, "labels": labels}, config)


def load_chain(path, config: Config = DEFAULT) -> MarkovChain:
    with Path(path).open("r", encoding="utf-8") as fh:
        return validate_chain(json.load(fh), config)


def save_chain(chain: MarkovChain, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(chain.to_dict(), fh, indent=2)
        fh.write("\n")


def check_distribution(weights, n: int | None = None, config: Config = DEFAULT) -> np.ndarray:
    """Validate a probability vector; tiny negative entries are clamped to 0."""
    w = np.array(weights, dtype=float).reshape(-1)
    if n is not None and w.shape[0] != n:
        raise errors.LengthMismatch(f"expected {n} weights, got {w.shape[0]}")
    if not np.all(np.isfinite(w)):
        raise errors.BadDistribution("non-finite weight")
    if w.min() < -config.dist_negative:
        raise errors.BadDistribution(f"negative weight {w.min()!r}")
    if abs(w.sum() - 1.0) > config.dist_sum:
        raise errors.BadDistribution(f"weights sum to {w.sum()!r}")
    return np.clip(w, 0.0, None)


def point_mass(n: int, x: int) -> np.ndarray:
    d = np.zeros(n)
    d[x] = 1.0
    return d


def _gth(P: np.ndarray) -> np.ndarray:
    """Grassmann-Taksar-Heyman elimination: subtraction-free stationary solve."""
    A = np.array(P, dtype=float)
    n = A.shape[0]
    for k in range(n - 1, 0, -1):
        s = A[k, :k].sum()
        if s <= 0:
            raise errors.SolverFailure(f"GTH pivot vanished at state {k}")
        A[:k, k] /= s
        A[:k, :k] += np.outer(A[:k, k], A[k, :k])
    x = np.zeros(n)
    x[0] = 1.0
    for k in range(1, n):
        x[k] = x[:k] @ A[:k, k]
    return x / x.sum()


def stationary(chain: MarkovChain) -> np.ndarray:
    """Unique stationary distribution of an irreducible chain."""
    M = chain.jump_matrix
    pi = _gth(M)
    resid = np.abs(pi @ M - pi).max()
    if not np.isfinite(resid) or resid > chain.config.stationary_residual:
        raise errors.SolverFailure(f"stationary residual {resid:.3e} too large")
    pi.setflags(write=False)
    return pi


def kernel_at(chain: MarkovChain, t) -> np.ndarray:
    """Transition kernel ``p_t(x, y)``; rows indexed by the start state."""
    if t < 0:
        raise errors.NegativeTime(f"t = {t} < 0")
    if chain.continuous:
        return poisson_power_sum(chain.jump_matrix, chain.rate * float(t),
                                 chain.config.series_tail)
    if int(t) != t:
        raise errors.BadTime(f"discrete chains need integer t, got {t}")
    return discrete_power(chain.matrix, int(t))


def tv_distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise errors.LengthMismatch(f"{a.shape} vs {b.shape}")
    return 0.5 * float(np.abs(a - b).sum())


def lazify(chain: MarkovChain) -> MarkovChain:
    """``(I + P) / 2``: holding probability at least 1/2 everywhere."""
    if chain.continuous:
        raise errors.WrongMode("lazify applies to discrete chains only")
    P = 0.5 * (np.eye(chain.n) + chain.matrix)
    return validate_chain({"mode": DISCRETE, "matrix": P, "labels": list(chain.labels)},
                          chain.config)


def is_lazy(chain: MarkovChain) -> bool:
    return (not chain.continuous) and bool(np.all(np.diag(chain.matrix) >= 0.5 - 1e-15))


def is_reversible(chain: MarkovChain) -> bool:
    pi = chain.pi
    flow = pi[:, None] * chain.matrix
    return bool(np.abs(flow - flow.T).max() <= chain.config.reversible)
