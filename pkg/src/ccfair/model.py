"""Network state and the synchronous follow dynamics.

Content creators are indexed ``1..n`` by quality (1 is best). A user follows
a recommended creator iff it is strictly better than every creator the user
already follows, so only the user's best followee matters for the dynamics.

``ReducedState`` keeps exactly that: ``best[u]`` (0 = follows nobody) and
per-creator follower ``counts``. ``FullNetwork`` keeps the explicit ``m x n``
adjacency and exists to cross-check the reduction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class ModelParams:
    n: int
    m: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidArgumentError(f"n must be an integer >= 2, got {self.n!r}")
        if int(self.m) != self.m or self.m < 1:
            raise InvalidArgumentError(f"m must be an integer >= 1, got {self.m!r}")
        if self.m < self.n:
            warnings.warn(
                f"m={self.m} < n={self.n}: the model is meant for many more users "
                "than creators",
                stacklevel=3,
            )


@dataclass(frozen=True)
class ReducedState:
    best: tuple[int, ...]
    counts: tuple[int, ...]

    @classmethod
    def empty(cls, params: ModelParams) -> "ReducedState":
        return cls((0,) * params.m, (0,) * params.n)

    @property
    def m(self) -> int:
        return len(self.best)

    @property
    def n(self) -> int:
        return len(self.counts)

    def best_array(self) -> np.ndarray:
        return np.asarray(self.best, dtype=np.int64)

    def counts_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)

    def total_follows(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True, eq=False)
class FullNetwork:
    adjacency: np.ndarray  # (m, n) bool; column i-1 is CC_i

    @classmethod
    def empty(cls, params: ModelParams) -> "FullNetwork":
        return cls(np.zeros((params.m, params.n), dtype=bool))

    def __eq__(self, other):
        if not isinstance(other, FullNetwork):
            return NotImplemented
        return np.array_equal(self.adjacency, other.adjacency)

    __hash__ = None


def follow_decision(best_u: int, rec: int, n: int | None = None) -> bool:
    """True iff a user whose best followee is ``best_u`` follows ``rec``."""
    if rec < 1 or (n is not None and rec > n):
        raise InvalidArgumentError(f"recommendation {rec!r} outside 1..{n or 'n'}")
    if best_u < 0 or (n is not None and best_u > n):
        raise InvalidArgumentError(f"best index {best_u!r} outside 0..{n or 'n'}")
    return best_u == 0 or rec < best_u


def _check_recs(recs, m: int, n: int) -> np.ndarray:
    recs = np.asarray(recs, dtype=np.int64)
    if recs.shape != (m,):
        raise InvalidArgumentError(f"expected {m} recommendations, got shape {recs.shape}")
    if m and (recs.min() < 1 or recs.max() > n):
        raise InvalidArgumentError(f"recommendations must lie in 1..{n}")
    return recs


def follow_mask(best: np.ndarray, recs: np.ndarray) -> np.ndarray:
    return (best == 0) | (recs < best)


def apply_round(state: ReducedState, recs) -> ReducedState:
    """One synchronous round: every decision is taken against ``state``."""
    recs = _check_recs(recs, state.m, state.n)
    best = state.best_array()
    follows = follow_mask(best, recs)
    if not follows.any():
        return state
    best[follows] = recs[follows]
    counts = state.counts_array() + np.bincount(recs[follows] - 1, minlength=state.n)
    return ReducedState(tuple(best.tolist()), tuple(counts.tolist()))


def project(net: FullNetwork) -> ReducedState:
    adj = np.asarray(net.adjacency, dtype=bool)
    has_any = adj.any(axis=1)
    best = np.where(has_any, adj.argmax(axis=1) + 1, 0)
    counts = adj.sum(axis=0)
    return ReducedState(tuple(best.tolist()), tuple(counts.tolist()))


def apply_round_full(net: FullNetwork, recs) -> FullNetwork:
    """The follow rule on the explicit adjacency matrix."""
    adj = np.asarray(net.adjacency, dtype=bool)
    m, n = adj.shape
    recs = _check_recs(recs, m, n)
    # a user may follow CC_i only if no CC_j with j <= i is followed yet
    better_or_equal = np.cumsum(adj, axis=1) > 0
    blocked = better_or_equal[np.arange(m), recs - 1]
    new = adj.copy()
    users = np.flatnonzero(~blocked)
    new[users, recs[users] - 1] = True
    return FullNetwork(new)
