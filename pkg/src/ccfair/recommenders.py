"""The three recommendation policies.

Each policy is a distribution over creators that depends only on the global
follower counts. Policies are expressed as non-negative integer weights so
that sampling and the exact chain share one exact representation:

* UR: weight 1 for every creator.
* PA: weight ``counts[i] + 1``.
* ExtremePA: weight 1 on the creators with the maximum count, 0 elsewhere.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import InvalidArgumentError
from .model import ReducedState
from .rng import SplitMixStream


class RecommenderKind(enum.Enum):
    UR = "ur"
    PA = "pa"
    EXTREME_PA = "extremepa"

    @classmethod
    def from_tag(cls, tag: "str | RecommenderKind") -> "RecommenderKind":
        if isinstance(tag, cls):
            return tag
        try:
            return cls(str(tag).lower())
        except ValueError:
            raise InvalidArgumentError(
                f"unknown recommender {tag!r}; expected one of "
                + ", ".join(k.value for k in cls)
            ) from None

    @property
    def tag(self) -> str:
        return self.value

    def __str__(self) -> str:
        return self.value


def _as_counts(counts) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.int64)
    if counts.ndim != 1 or counts.size == 0:
        raise InvalidArgumentError("counts must be a non-empty 1-d vector")
    if (counts < 0).any():
        raise InvalidArgumentError("counts must be non-negative")
    return counts


def rec_weights(kind: RecommenderKind, counts) -> np.ndarray:
    """Integer weights whose normalization is the recommendation distribution."""
    kind = RecommenderKind.from_tag(kind)
    counts = _as_counts(counts)
    if kind is RecommenderKind.UR:
        return np.ones_like(counts)
    if kind is RecommenderKind.PA:
        return counts + 1
    return (counts == counts.max()).astype(np.int64)


def batch_weights(kind: RecommenderKind, counts: np.ndarray) -> np.ndarray:
    """Row-wise :func:`rec_weights` for a ``(runs, n)`` count matrix."""
    if kind is RecommenderKind.UR:
        return np.ones_like(counts)
    if kind is RecommenderKind.PA:
        return counts + 1
    return (counts == counts.max(axis=1, keepdims=True)).astype(counts.dtype)


def rec_probabilities(kind: RecommenderKind, counts) -> np.ndarray:
    w = rec_weights(kind, counts)
    p = w / w.sum()
    s = p.sum()
    if abs(s - 1.0) > 1e-12:  # pragma: no cover - guard against weight bugs
        p = p / s
    return p


def scale_uniforms(u: np.ndarray, total) -> np.ndarray:
    """Map uniforms in [0, 1) to integers in ``[0, total)``."""
    x = (u * total).astype(np.int64)
    return np.minimum(x, np.asarray(total, dtype=np.int64) - 1)


def pick(cum_weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw of 1-based creator indices from cumulative weights."""
    x = scale_uniforms(u, cum_weights[-1])
    return np.searchsorted(cum_weights, x, side="right") + 1


def sample_round(kind: RecommenderKind, counts, m: int, rng) -> np.ndarray:
    """Draw one recommendation per user, users in order ``1..m``.

    ``rng`` is a :class:`SplitMixStream` (consumes exactly ``m`` draws) or a
    ``numpy.random.Generator``.
    """
    kind = RecommenderKind.from_tag(kind)
    cum = np.cumsum(rec_weights(kind, counts))
    if isinstance(rng, SplitMixStream):
        u = rng.take(m)
    elif isinstance(rng, np.random.Generator):
        u = rng.random(m)
    else:
        raise InvalidArgumentError(f"unsupported random stream {type(rng).__name__}")
    return pick(cum, u)


def is_absorbing(kind: RecommenderKind, state: ReducedState) -> bool:
    """Structural absorption test, valid on states reachable from empty.

    UR/PA: every user follows CC_1. ExtremePA: a unique most-followed CC_i
    and every user already follows some CC_j with j <= i.
    """
    kind = RecommenderKind.from_tag(kind)
    best = state.best
    if kind is not RecommenderKind.EXTREME_PA:
        return all(b == 1 for b in best)
    counts = state.counts
    top = max(counts)
    leaders = [i for i, c in enumerate(counts, start=1) if c == top]
    if len(leaders) != 1:
        return False
    i = leaders[0]
    return all(0 < b <= i for b in best)
