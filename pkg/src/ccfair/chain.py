"""Exact absorbing-chain analysis of small instances.

States are :class:`ReducedState` values reachable from the empty network.
Transition probabilities are exact fractions: every policy is a set of
integer weights, and recommendations are i.i.d. across users given the
counts at the start of the round, so a row is the product of per-user
outcome distributions.

Two state encodings are available:

* labeled (default): ``best`` keeps user identities, so rows match the
  matrix picture one-to-one (e.g. ``n**m`` successors of the empty state).
* lumped: users are exchangeable, so ``best`` is stored sorted and rows are
  built from multinomials over groups of users sharing a best index. Time,
  counts and fairness are preserved exactly; the state space shrinks from
  exponential to polynomial in ``m``.

Every non-self-loop transition adds at least one follow, so ordering states
by total follows makes the chain a DAG plus self-loops. :func:`analyze`
solves the fundamental-matrix systems numerically; :func:`analyze_exact`
uses the DAG order for an exact rational back-substitution.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import CapacityError, ConsistencyError, InvalidArgumentError
from .fairness import is_cc_i_fair, is_fair, is_strictly_fair
from .model import ModelParams, ReducedState
from .recommenders import RecommenderKind, is_absorbing, rec_weights

DEFAULT_STATE_CAP = 100_000
DEFAULT_ROW_CAP = 100_000
DENSE_LIMIT = 2_000

Row = list[tuple[ReducedState, Fraction]]


def _state_key(s: ReducedState):
    return (sum(s.counts), s.counts, s.best)


def _user_options(b: int, weights: list[int], total: int) -> list[tuple[int, Fraction]]:
    """Outcomes for a user with best index ``b``: (new best, prob); 0 = no follow."""
    limit = b - 1 if b else len(weights)
    opts = []
    stay = total
    for j in range(1, limit + 1):
        wj = weights[j - 1]
        if wj:
            opts.append((j, Fraction(wj, total)))
            stay -= wj
    if stay:
        opts.append((0, Fraction(stay, total)))
    return opts


def transition_row(
    state: ReducedState,
    kind,
    params: ModelParams,
    *,
    lumped: bool = False,
    row_cap: int = DEFAULT_ROW_CAP,
) -> Row:
    """Exact successor distribution of ``state``, sorted canonically."""
    kind = RecommenderKind.from_tag(kind)
    if state.m != params.m or state.n != params.n:
        raise InvalidArgumentError("state does not match params")
    weights = rec_weights(kind, state.counts).tolist()
    total = sum(weights)
    opts_by_best = {b: _user_options(b, weights, total) for b in set(state.best)}
    if lumped:
        merged = _lumped_row(state, opts_by_best, row_cap)
    else:
        merged = _labeled_row(state, opts_by_best, row_cap)
    row = sorted(merged.items(), key=lambda kv: _state_key(kv[0]))
    if sum(p for _, p in row) != 1:
        raise ConsistencyError(f"row of {state} does not sum to 1")
    return row


def _labeled_row(state, opts_by_best, row_cap) -> dict:
    per_user = [opts_by_best[b] for b in state.best]
    size = math.prod(len(o) for o in per_user)
    if size > row_cap:
        raise CapacityError(f"row expansion of {state} too large", row_cap, size)
    merged: dict[ReducedState, Fraction] = {}
    for combo in itertools.product(*per_user):
        prob = Fraction(1)
        best = list(state.best)
        counts = list(state.counts)
        for u, (j, p) in enumerate(combo):
            prob *= p
            if j:
                best[u] = j
                counts[j - 1] += 1
        nxt = ReducedState(tuple(best), tuple(counts))
        merged[nxt] = merged.get(nxt, 0) + prob
    return merged


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in _compositions(total - k, parts - 1):
            yield (k,) + rest


def _lumped_row(state, opts_by_best, row_cap) -> dict:
    groups = sorted(Counter(state.best).items())
    size = math.prod(math.comb(g + len(opts_by_best[b]) - 1, g) for b, g in groups)
    if size > row_cap:
        raise CapacityError(f"row expansion of {state} too large", row_cap, size)

    # per group: list of (tuple of resulting best indices, counts delta, prob)
    group_outcomes = []
    for b, g in groups:
        opts = opts_by_best[b]
        outs = []
        for ks in _compositions(g, len(opts)):
            coef = math.factorial(g)
            prob = Fraction(1)
            bests = []
            delta = {}
            for k, (j, p) in zip(ks, opts):
                coef //= math.factorial(k)
                prob *= p**k
                bests += [j if j else b] * k
                if j and k:
                    delta[j] = k
            outs.append((bests, delta, prob * coef))
        group_outcomes.append(outs)

    merged: dict[ReducedState, Fraction] = {}
    for combo in itertools.product(*group_outcomes):
        prob = Fraction(1)
        best = []
        counts = list(state.counts)
        for bests, delta, p in combo:
            prob *= p
            best += bests
            for j, k in delta.items():
                counts[j - 1] += k
        nxt = ReducedState(tuple(sorted(best)), tuple(counts))
        merged[nxt] = merged.get(nxt, 0) + prob
    return merged


def leader_lemma_holds(state: ReducedState) -> bool:
    """Each most-followed CC_i has a user following nothing better than CC_i."""
    top = max(state.counts)
    for i, c in enumerate(state.counts, start=1):
        if c == top and not any(b == 0 or b >= i for b in state.best):
            return False
    return True


@dataclass
class StateSpace:
    params: ModelParams
    kind: RecommenderKind
    lumped: bool
    states: list[ReducedState]
    index: dict[ReducedState, int]
    start_index: int
    rows: list[list[tuple[int, Fraction]]]

    def __len__(self) -> int:
        return len(self.states)

    def row_states(self, i: int) -> Row:
        return [(self.states[j], p) for j, p in self.rows[i]]


def enumerate_reachable(
    params: ModelParams,
    kind,
    cap: int = DEFAULT_STATE_CAP,
    *,
    lumped: bool = False,
    row_cap: int = DEFAULT_ROW_CAP,
) -> StateSpace:
    """Breadth-first closure from the empty state.

    Successors are visited in canonical order (total follows, counts, best),
    so the state numbering is deterministic.
    """
    kind = RecommenderKind.from_tag(kind)
    if cap < 1:
        raise InvalidArgumentError("cap must be >= 1")
    start = ReducedState.empty(params)
    states = [start]
    index = {start: 0}
    rows: list[list[tuple[int, Fraction]]] = []
    queue = deque([0])
    check_leader = kind is RecommenderKind.EXTREME_PA
    while queue:
        i = queue.popleft()
        s = states[i]
        if check_leader and not leader_lemma_holds(s):
            raise ConsistencyError(f"reachable ExtremePA state violates the leader lemma: {s}")
        row = transition_row(s, kind, params, lumped=lumped, row_cap=row_cap)
        idx_row = []
        total = sum(s.counts)
        for nxt, p in row:
            if nxt != s and sum(nxt.counts) <= total:
                raise ConsistencyError(f"transition {s} -> {nxt} adds no follow")
            j = index.get(nxt)
            if j is None:
                if len(states) >= cap:
                    raise CapacityError(
                        f"state cap exceeded with {len(queue) + 1} states still in the frontier",
                        cap,
                        len(states) + 1,
                    )
                j = len(states)
                states.append(nxt)
                index[nxt] = j
                queue.append(j)
            idx_row.append((j, p))
        rows.append(idx_row)
    # rows were appended in BFS pop order, which equals state order
    return StateSpace(params, kind, lumped, states, index, 0, rows)


def _absorbing_flags(space: StateSpace) -> np.ndarray:
    flags = np.array([is_absorbing(space.kind, s) for s in space.states])
    for i, row in enumerate(space.rows):
        self_loop = len(row) == 1 and row[0][0] == i
        if self_loop != flags[i]:
            raise ConsistencyError(
                f"structural absorption test disagrees with the transition row for {space.states[i]}"
            )
    return flags


@dataclass
class ChainAnalysis:
    space: StateSpace
    rows: list[list[tuple[int, float]]]
    absorbing: np.ndarray
    mu: np.ndarray  # expected rounds to absorption per state (0 when absorbing)
    absorbing_indices: np.ndarray
    absorption_dist: np.ndarray  # aligned with absorbing_indices, from the empty state
    exact_fairness: np.ndarray
    exact_fully_fair: float
    exact_strict_fully_fair: float
    exact_mean_counts: np.ndarray

    @property
    def mu_empty(self) -> float:
        return float(self.mu[self.space.start_index])

    @property
    def n_states(self) -> int:
        return len(self.space)

    @property
    def n_absorbing(self) -> int:
        return int(self.absorbing.sum())


def _final_stats(space: StateSpace, absorbing_idx, dist):
    n = space.params.n
    fair = np.zeros(n)
    weak = strict = 0.0
    mean = np.zeros(n)
    for a, p in zip(absorbing_idx, dist):
        c = space.states[a].counts
        for i in range(1, n + 1):
            if is_cc_i_fair(c, i):
                fair[i - 1] += p
        weak += p * is_fair(c)
        strict += p * is_strictly_fair(c)
        mean += p * np.asarray(c, dtype=np.float64)
    return fair, weak, strict, mean


def analyze(space: StateSpace) -> ChainAnalysis:
    """Expected absorption times and absorption distribution.

    Solves ``(I - Q) mu = 1`` and ``(I - Q)^T v = e_start`` (expected visits)
    with a direct LU factorization: dense for small transient blocks, sparse
    otherwise.
    """
    flags = _absorbing_flags(space)
    N = len(space)
    transient = np.flatnonzero(~flags)
    absorbing_idx = np.flatnonzero(flags)
    tpos = np.full(N, -1)
    tpos[transient] = np.arange(transient.size)
    apos = np.full(N, -1)
    apos[absorbing_idx] = np.arange(absorbing_idx.size)

    rows_f = [[(j, float(p)) for j, p in row] for row in space.rows]
    qi, qj, qv, ri, rj, rv = [], [], [], [], [], []
    for i in transient:
        for j, p in rows_f[i]:
            if flags[j]:
                ri.append(tpos[i]), rj.append(apos[j]), rv.append(p)
            else:
                qi.append(tpos[i]), qj.append(tpos[j]), qv.append(p)
    T = transient.size
    Q = scipy.sparse.csr_matrix((qv, (qi, qj)), shape=(T, T))
    Rm = scipy.sparse.csr_matrix((rv, (ri, rj)), shape=(T, absorbing_idx.size))
    A = scipy.sparse.identity(T, format="csc") - Q.tocsc()
    rhs = np.zeros((T, 2))
    rhs[:, 0] = 1.0
    start_t = tpos[space.start_index]
    if start_t < 0:
        raise ConsistencyError("the empty state cannot be absorbing")
    try:
        if T <= DENSE_LIMIT:
            Ad = A.toarray()
            mu_t = scipy.linalg.solve(Ad, np.ones(T))
            e = np.zeros(T)
            e[start_t] = 1.0
            visits = scipy.linalg.solve(Ad.T, e)
        else:
            lu = scipy.sparse.linalg.splu(A)
            mu_t = lu.solve(np.ones(T))
            e = np.zeros(T)
            e[start_t] = 1.0
            visits = lu.solve(e, trans="T")
    except (np.linalg.LinAlgError, RuntimeError, ValueError) as err:
        raise ConsistencyError(f"transient block is singular: {err}") from err
    if not (np.isfinite(mu_t).all() and np.isfinite(visits).all()):
        raise ConsistencyError("transient block is singular")
    mu = np.zeros(N)
    mu[transient] = mu_t
    dist = Rm.T @ visits
    fair, weak, strict, mean = _final_stats(space, absorbing_idx, dist)
    return ChainAnalysis(
        space=space,
        rows=rows_f,
        absorbing=flags,
        mu=mu,
        absorbing_indices=absorbing_idx,
        absorption_dist=dist,
        exact_fairness=fair,
        exact_fully_fair=float(weak),
        exact_strict_fully_fair=float(strict),
        exact_mean_counts=mean,
    )


@dataclass
class ExactAnalysis:
    """Rational counterpart of :class:`ChainAnalysis`."""

    mu: list[Fraction]
    absorption: dict[int, Fraction]
    fairness: list[Fraction]
    fully_fair: Fraction
    strict_fully_fair: Fraction
    mean_counts: list[Fraction]

    @property
    def mu_empty(self) -> Fraction:
        return self.mu[0]


def analyze_exact(space: StateSpace) -> ExactAnalysis:
    """Exact rational analysis using the DAG order of the chain."""
    flags = _absorbing_flags(space)
    N = len(space)
    order = sorted(range(N), key=lambda i: sum(space.states[i].counts))
    mu = [Fraction(0)] * N
    for i in reversed(order):
        if flags[i]:
            continue
        stay = Fraction(0)
        acc = Fraction(1)
        for j, p in space.rows[i]:
            if j == i:
                stay = p
            else:
                acc += p * mu[j]
        mu[i] = acc / (1 - stay)

    # push probability mass forward; leaving a transient state skips its self-loop
    mass = [Fraction(0)] * N
    mass[space.start_index] = Fraction(1)
    absorption: dict[int, Fraction] = {}
    for i in order:
        if not mass[i]:
            continue
        if flags[i]:
            absorption[i] = mass[i]
            continue
        stay = next((p for j, p in space.rows[i] if j == i), Fraction(0))
        for j, p in space.rows[i]:
            if j != i:
                mass[j] += mass[i] * p / (1 - stay)
    n = space.params.n
    fair = [Fraction(0)] * n
    weak = strict = Fraction(0)
    mean = [Fraction(0)] * n
    for a, p in absorption.items():
        c = space.states[a].counts
        for i in range(n):
            if is_cc_i_fair(c, i + 1):
                fair[i] += p
            mean[i] += p * c[i]
        if is_fair(c):
            weak += p
        if is_strictly_fair(c):
            strict += p
    if sum(absorption.values()) != 1:
        raise ConsistencyError("absorption probabilities do not sum to 1")
    return ExactAnalysis(mu, absorption, fair, weak, strict, mean)


def classify_extreme_state(state: ReducedState) -> tuple[str, int | None]:
    """Group of an ExtremePA state in the two-phase picture.

    Returns ``("0", None)`` for the empty state, ``("S*", i)`` for absorbing
    states led by CC_i, ``("S", i)`` for unique-leader states that absorb in
    one more round and ``("E", None)`` for tied leaders.
    """
    if not any(state.counts):
        return "0", None
    top = max(state.counts)
    leaders = [i for i, c in enumerate(state.counts, start=1) if c == top]
    if len(leaders) > 1:
        return "E", None
    i = leaders[0]
    if all(0 < b <= i for b in state.best):
        return "S*", i
    return "S", i


BINOMIAL_READINGS = ("m_choose_k", "k_choose_m")


def _binom(reading: str, m: int, k: int) -> int:
    if reading == "m_choose_k":
        return math.comb(m, k)
    if reading == "k_choose_m":
        return math.comb(k, m)
    raise InvalidArgumentError(f"unknown binomial reading {reading!r}")


def thm5_closed_form_check(m: int, n: int = 2, reading: str = "m_choose_k") -> tuple[Fraction, Fraction]:
    """Closed-form expected final counts of CC_1 and CC_2 under ExtremePA, n=2.

    ``E1 = sum_{k <= (m-1)//2} B(k)/n^m * k + sum_{k > (m-1)//2} B(k)/n^m * m``
    and ``E2 = sum_k B(k)/n^m * k``, where ``B(k)`` is the binomial
    coefficient under ``reading``. Exact big-integer arithmetic throughout.
    """
    if n != 2:
        raise InvalidArgumentError("the closed form is only stated for n = 2")
    if m < 1:
        raise InvalidArgumentError("m must be >= 1")
    denom = n**m
    half = (m - 1) // 2
    e1 = sum(Fraction(_binom(reading, m, k), denom) * (k if k <= half else m) for k in range(m + 1))
    e2 = sum(Fraction(_binom(reading, m, k), denom) * k for k in range(m + 1))
    return e1, e2


def closed_form_reading_report(m_values=range(1, 7)) -> dict:
    """Compare both binomial readings with the exact chain for n=2 ExtremePA."""
    per_m = {}
    for m in m_values:
        space = enumerate_reachable(ModelParams(2, m), RecommenderKind.EXTREME_PA, lumped=True)
        exact = analyze_exact(space)
        chain = (exact.mean_counts[0], exact.mean_counts[1])
        per_m[m] = {
            "chain": chain,
            **{r: thm5_closed_form_check(m, 2, r) for r in BINOMIAL_READINGS},
        }
    matching = [r for r in BINOMIAL_READINGS if all(v[r] == v["chain"] for v in per_m.values())]
    return {"per_m": per_m, "matching_readings": matching}
