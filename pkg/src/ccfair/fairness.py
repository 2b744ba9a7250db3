"""Individual fairness for content creators.

Ex-post CC_i-fairness: fewer than ``i`` creators have strictly more followers
than CC_i. A state is (weakly) fair when counts are non-increasing in the
quality index; the strict variant requires strictly decreasing counts.
Ex-ante variants apply the same comparisons to expected counts at
absorption.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class FairnessReport:
    cc_fair: tuple[bool, ...]
    fully_fair: bool
    strict_fully_fair: bool
    ex_ante_ordering_ok: bool | None = None
    violating_pairs: list[tuple[int, int]] = field(default_factory=list)


def _vec(counts) -> np.ndarray:
    a = np.asarray(counts)
    if a.ndim != 1 or a.size == 0:
        raise InvalidArgumentError("counts must be a non-empty 1-d vector")
    return a


def is_cc_i_fair(counts, i: int) -> bool:
    c = _vec(counts)
    if not 1 <= i <= c.size:
        raise InvalidArgumentError(f"creator index {i} outside 1..{c.size}")
    return int((c > c[i - 1]).sum()) < i


def is_fair(counts) -> bool:
    c = _vec(counts)
    return bool((c[:-1] >= c[1:]).all())


def is_strictly_fair(counts) -> bool:
    c = _vec(counts)
    return bool((c[:-1] > c[1:]).all())


def strictly_greater_counts(counts: np.ndarray) -> np.ndarray:
    """For a ``(runs, n)`` integer matrix, how many entries in each row exceed
    each entry. Sort-based, O(runs * n log n) memory-light."""
    c = np.asarray(counts, dtype=np.int64)
    runs, n = c.shape
    if runs == 0:
        return np.zeros((0, n), dtype=np.int64)
    span = int(c.max()) - int(c.min()) + 1
    off = (np.arange(runs, dtype=np.int64) * span)[:, None] - int(c.min())
    flat_sorted = (np.sort(c, axis=1) + off).ravel()
    pos = np.searchsorted(flat_sorted, (c + off).ravel(), side="right")
    pos = pos.reshape(runs, n) - (np.arange(runs) * n)[:, None]
    return n - pos


def cc_fair_matrix(counts: np.ndarray) -> np.ndarray:
    """Row-wise ex-post CC_i-fairness, shape ``(runs, n)``."""
    greater = strictly_greater_counts(counts)
    return greater < np.arange(1, greater.shape[1] + 1)


def ex_post_report(counts) -> FairnessReport:
    c = _vec(counts)
    return FairnessReport(
        cc_fair=tuple(is_cc_i_fair(c, i) for i in range(1, c.size + 1)),
        fully_fair=is_fair(c),
        strict_fully_fair=is_strictly_fair(c),
    )


def ex_ante_report(mean_counts, tolerance=0.0) -> FairnessReport:
    """Check ``E[a_1] >= E[a_2] >= ... >= E[a_n]`` up to ``tolerance``.

    ``tolerance`` is either one absolute slack or a per-creator vector of
    slacks (e.g. 3-sigma standard errors); a pair ``(i, j)`` is compared with
    the sum of the two creators' slacks.
    """
    e = np.asarray(_vec(mean_counts), dtype=np.float64)
    n = e.size
    tol = np.broadcast_to(np.asarray(tolerance, dtype=np.float64), (n,))
    if (tol < 0).any():
        raise InvalidArgumentError("tolerance must be non-negative")
    if np.ndim(tolerance) == 0:
        slack = np.full((n, n), float(tolerance))
    else:
        slack = tol[:, None] + tol[None, :]

    violating = [
        (i + 1, i + 2) for i in range(n - 1) if e[i] < e[i + 1] - slack[i, i + 1]
    ]
    # ex-ante CC_i-fair: fewer than i creators with a clearly larger expectation
    above = e[None, :] > e[:, None] + slack
    cc_fair = tuple(bool(above[i].sum() < i + 1) for i in range(n))
    strict = bool(all(e[i] > e[i + 1] + slack[i, i + 1] for i in range(n - 1)))
    return FairnessReport(
        cc_fair=cc_fair,
        fully_fair=not violating,
        strict_fully_fair=strict,
        ex_ante_ordering_ok=not violating,
        violating_pairs=violating,
    )
