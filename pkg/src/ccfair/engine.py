"""Monte Carlo runs until absorption.

Two drivers share the same per-run random streams (see :mod:`ccfair.rng`):

* :func:`run_once` / :func:`run_once_full` step one trajectory with the
  plain model functions; they are the readable reference.
* :func:`simulate_runs` advances a block of runs at once, drawing only for
  users whose state can still change. Because draw ``t*m + u`` of a run is a
  pure function of the run seed, its outcomes equal :func:`run_once` bit for
  bit, independent of block size and thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import os

import numpy as np

from .errors import ConsistencyError, InvalidArgumentError
from .fairness import cc_fair_matrix
from .model import (
    FullNetwork,
    ModelParams,
    ReducedState,
    apply_round,
    apply_round_full,
    project,
)
from .recommenders import (
    RecommenderKind,
    batch_weights,
    is_absorbing,
    sample_round,
    scale_uniforms,
)
from .rng import SplitMixStream, run_seed, run_seeds, uniforms

DEFAULT_MAX_ROUNDS = 1_000_000
CHUNK_ELEMENTS = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    kind: RecommenderKind
    runs: int
    master_seed: int
    max_rounds: int = DEFAULT_MAX_ROUNDS

    def __post_init__(self):
        object.__setattr__(self, "kind", RecommenderKind.from_tag(self.kind))
        if self.runs < 1:
            raise InvalidArgumentError(f"runs must be >= 1, got {self.runs}")
        if self.max_rounds < 1:
            raise InvalidArgumentError(f"max_rounds must be >= 1, got {self.max_rounds}")

    def as_dict(self) -> dict:
        return {
            "n": self.params.n,
            "m": self.params.m,
            "rs": self.kind.tag,
            "runs": self.runs,
            "seed": self.master_seed,
            "max_rounds": self.max_rounds,
        }


@dataclass(frozen=True)
class RunOutcome:
    final: ReducedState
    rounds_to_absorption: int
    absorbed: bool


def iter_reduced(params: ModelParams, kind, seed: int, max_rounds: int = DEFAULT_MAX_ROUNDS):
    """Yield the reduced state after rounds 0, 1, ... until absorption."""
    kind = RecommenderKind.from_tag(kind)
    stream = SplitMixStream(seed)
    state = ReducedState.empty(params)
    yield state
    for _ in range(max_rounds):
        if is_absorbing(kind, state):
            return
        recs = sample_round(kind, state.counts, params.m, stream)
        state = apply_round(state, recs)
        yield state


def iter_full(params: ModelParams, kind, seed: int, max_rounds: int = DEFAULT_MAX_ROUNDS):
    """Same as :func:`iter_reduced` on the explicit adjacency matrix."""
    kind = RecommenderKind.from_tag(kind)
    stream = SplitMixStream(seed)
    net = FullNetwork.empty(params)
    yield net
    for _ in range(max_rounds):
        if is_absorbing(kind, project(net)):
            return
        counts = net.adjacency.sum(axis=0)
        recs = sample_round(kind, counts, params.m, stream)
        net = apply_round_full(net, recs)
        yield net


def run_once(params: ModelParams, kind, seed: int, max_rounds: int = DEFAULT_MAX_ROUNDS) -> RunOutcome:
    kind = RecommenderKind.from_tag(kind)
    t = -1
    for t, state in enumerate(iter_reduced(params, kind, seed, max_rounds)):
        pass
    return RunOutcome(state, t, is_absorbing(kind, state))


def run_once_full(params: ModelParams, kind, seed: int, max_rounds: int = DEFAULT_MAX_ROUNDS):
    """Returns ``(final FullNetwork, rounds, absorbed)``."""
    kind = RecommenderKind.from_tag(kind)
    t = -1
    for t, net in enumerate(iter_full(params, kind, seed, max_rounds)):
        pass
    return net, t, is_absorbing(kind, project(net))


@dataclass
class RunArrays:
    """Per-run outcomes of a batch, in run-index order."""

    rounds: np.ndarray  # (runs,) int64
    absorbed: np.ndarray  # (runs,) bool
    final_counts: np.ndarray  # (runs, n) int64
    final_worst_best: np.ndarray  # (runs,) largest best index, n+1 if anyone follows nobody
    round1_unique_max: np.ndarray  # (runs,) bool

    @classmethod
    def concat(cls, parts: list["RunArrays"]) -> "RunArrays":
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in cls.__dataclass_fields__))


def _simulate_block(kind: RecommenderKind, n: int, m: int, seeds: np.ndarray, max_rounds: int) -> RunArrays:
    R = seeds.size
    best = np.zeros(R * m, dtype=np.int64)
    counts = np.zeros((R, n), dtype=np.int64)
    rounds = np.zeros(R, dtype=np.int64)
    absorbed = np.zeros(R, dtype=bool)
    unique1 = np.zeros(R, dtype=bool)
    alive = np.arange(R)
    # candidates: users whose best is not CC_1; everyone else is frozen for good.
    # cand (flat index) stays sorted, so cand_run is sorted as well.
    cand = np.arange(R * m, dtype=np.int64)
    cand_run = np.repeat(np.arange(R, dtype=np.int64), m)
    seeds = seeds.astype(np.uint64)
    extreme = kind is RecommenderKind.EXTREME_PA
    t = 0
    while alive.size:
        c_alive = counts[alive]
        if extreme:
            top = c_alive.max(axis=1, keepdims=True)
            leaders = c_alive == top
            lead = leaders.argmax(axis=1) + 1
            worst = np.ones(R, dtype=np.int64)
            if cand.size:
                b = best[cand]
                starts = np.flatnonzero(np.diff(cand_run)) + 1
                starts = np.concatenate(([0], starts))
                worst[cand_run[starts]] = np.maximum.reduceat(np.where(b == 0, n + 1, b), starts)
            done = (leaders.sum(axis=1) == 1) & (worst[alive] <= lead)
        else:
            done = c_alive[:, 0] == m
        if done.any():
            fin = alive[done]
            rounds[fin] = t
            absorbed[fin] = True
            alive = alive[~done]
            c_alive = c_alive[~done]
            keep = np.zeros(R, dtype=bool)
            keep[alive] = True
            sel = keep[cand_run]
            cand, cand_run = cand[sel], cand_run[sel]
        if not alive.size:
            break
        if t >= max_rounds:
            rounds[alive] = t
            break

        w = batch_weights(kind, c_alive)
        cum = np.cumsum(w, axis=1)
        rec = _draw(w, cum, alive, cand, cand_run, seeds, t, m, n, R)

        b = best[cand]
        f = (b == 0) | (rec < b)
        rf = rec[f]
        best[cand[f]] = rf
        counts += np.bincount(cand_run[f] * n + rf - 1, minlength=R * n).reshape(R, n)
        keep = (b != 1) & ~(f & (rec == 1))
        cand, cand_run = cand[keep], cand_run[keep]
        t += 1
        if t == 1:
            unique1 = (counts == counts.max(axis=1, keepdims=True)).sum(axis=1) == 1

    bmat = best.reshape(R, m)
    worst_best = np.where(bmat == 0, n + 1, bmat).max(axis=1)
    return RunArrays(rounds, absorbed, counts, worst_best, unique1)


def _draw(w, cum, alive, cand, cand_run, seeds, t, m, n, R) -> np.ndarray:
    """Recommendations for the candidate users of the live runs."""
    if (cum == cum[0]).all():
        # every live run shares one distribution
        if (w[0] > 0).sum() == 1:
            return np.full(cand.size, int(w[0].argmax()) + 1, dtype=np.int64)
        u = uniforms(seeds[cand_run], (t * m + cand - cand_run * m).astype(np.uint64))
        x = scale_uniforms(u, cum[0, -1])
        return np.searchsorted(cum[0], x, side="right") + 1

    pos = np.full(R, -1, dtype=np.int64)
    pos[alive] = np.arange(alive.size)
    p = pos[cand_run]
    rec = np.empty(cand.size, dtype=np.int64)
    single = (w > 0).sum(axis=1) == 1
    det = single[p]
    if det.any():
        rec[det] = w.argmax(axis=1)[p[det]] + 1
    rnd = ~det
    if rnd.any():
        pr = p[rnd]
        cr = cand[rnd]
        rr = cand_run[rnd]
        total = cum[:, -1]
        u = uniforms(seeds[rr], (t * m + cr - rr * m).astype(np.uint64))
        x = scale_uniforms(u, total[pr])
        off = np.arange(alive.size, dtype=np.int64) * (int(total.max()) + 1)
        flat = (cum + off[:, None]).ravel()
        rec[rnd] = np.searchsorted(flat, x + off[pr], side="right") - pr * n + 1
    return rec


def block_bounds(runs: int, m: int, n: int, chunk_elements: int = CHUNK_ELEMENTS) -> list[tuple[int, int]]:
    size = max(1, chunk_elements // max(m, n))
    return [(s, min(runs, s + size)) for s in range(0, runs, size)]


def simulate_runs(config: SimConfig, threads: int | None = None, chunk_elements: int = CHUNK_ELEMENTS) -> RunArrays:
    """All runs of ``config`` as arrays. Run ``r`` uses ``run_seed(master_seed, r)``."""
    n, m = config.params.n, config.params.m
    bounds = block_bounds(config.runs, m, n, chunk_elements)

    def work(b):
        return _simulate_block(config.kind, n, m, run_seeds(config.master_seed, *b), config.max_rounds)

    threads = threads or os.cpu_count() or 1
    if threads == 1 or len(bounds) == 1:
        parts = [work(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, bounds))
    arrays = RunArrays.concat(parts)
    if config.kind is RecommenderKind.EXTREME_PA:
        bad = arrays.round1_unique_max & arrays.absorbed & (arrays.rounds > 2)
        if bad.any():
            raise ConsistencyError(
                f"ExtremePA run {int(np.flatnonzero(bad)[0])} had a unique leader after "
                "round 1 but needed more than 2 rounds"
            )
    return arrays


@dataclass
class BatchReport:
    config: dict
    runs: int
    n_absorbed: int
    frac_absorbed: float
    mean_time: float
    std_time: float
    cc_fair_freq: list[float]
    fully_fair_freq: float
    strict_fully_fair_freq: float
    mean_final_counts: list[float]
    std_final_counts: list[float]
    ci_halfwidths: dict = field(default_factory=dict)

    def sigma(self, key: str):
        """One standard error (a third of the stored 3-sigma half-width)."""
        v = self.ci_halfwidths[key]
        return [x / 3 for x in v] if isinstance(v, list) else v / 3


def _freq_halfwidth(p: float, N: int) -> float:
    return 3.0 * math.sqrt(p * (1.0 - p) / N) if N else math.nan


def summarize(config: SimConfig, arrays: RunArrays) -> BatchReport:
    """Aggregate in run-index order; statistics cover absorbed runs only."""
    ok = arrays.absorbed
    N = int(ok.sum())
    counts = arrays.final_counts[ok]
    times = arrays.rounds[ok].astype(np.float64)
    n = config.params.n
    if N:
        fair = cc_fair_matrix(counts)
        cc_freq = fair.mean(axis=0)
        weak = (counts[:, :-1] >= counts[:, 1:]).all(axis=1).mean()
        strict = (counts[:, :-1] > counts[:, 1:]).all(axis=1).mean()
        mean_counts = counts.mean(axis=0)
        std_counts = counts.std(axis=0, ddof=1) if N > 1 else np.zeros(n)
        mean_time = float(times.mean())
        std_time = float(times.std(ddof=1)) if N > 1 else 0.0
    else:
        cc_freq = np.full(n, math.nan)
        weak = strict = mean_time = std_time = math.nan
        mean_counts = std_counts = np.full(n, math.nan)
    root = math.sqrt(N) if N else math.nan
    ci = {
        "mean_time": 3.0 * std_time / root,
        "cc_fair_freq": [_freq_halfwidth(float(p), N) for p in cc_freq],
        "fully_fair_freq": _freq_halfwidth(float(weak), N),
        "strict_fully_fair_freq": _freq_halfwidth(float(strict), N),
        "mean_final_counts": [3.0 * float(s) / root for s in std_counts],
    }
    return BatchReport(
        config=config.as_dict(),
        runs=config.runs,
        n_absorbed=N,
        frac_absorbed=N / config.runs,
        mean_time=mean_time,
        std_time=std_time,
        cc_fair_freq=[float(x) for x in cc_freq],
        fully_fair_freq=float(weak),
        strict_fully_fair_freq=float(strict),
        mean_final_counts=[float(x) for x in mean_counts],
        std_final_counts=[float(x) for x in std_counts],
        ci_halfwidths=ci,
    )


def run_batch(config: SimConfig, threads: int | None = None) -> BatchReport:
    return summarize(config, simulate_runs(config, threads=threads))


def tie_probability_experiment(n: int, m_values, runs: int, seed: int) -> list[dict]:
    """Frequency of a tie at the maximum after round 1, per user count.

    Round 1 recommends uniformly from the empty state and every user follows,
    so the round-1 count vector is Multinomial(m, 1/n) and is sampled directly.
    """
    m_values = list(m_values)
    if not m_values:
        raise InvalidArgumentError("m_values must be non-empty")
    if runs < 1:
        raise InvalidArgumentError("runs must be >= 1")
    out = []
    for m in m_values:
        ModelParams(n, m)
        rng = np.random.default_rng([seed & ((1 << 64) - 1), m])
        counts = rng.multinomial(m, np.full(n, 1.0 / n), size=runs)
        ties = (counts == counts.max(axis=1, keepdims=True)).sum(axis=1) >= 2
        p = float(ties.mean())
        out.append({"m": m, "tie_freq": p, "ci_halfwidth": _freq_halfwidth(p, runs)})
    return out


def run_outcome(config: SimConfig, run_index: int) -> RunOutcome:
    """The reference-path outcome of one run of a batch."""
    return run_once(config.params, config.kind, run_seed(config.master_seed, run_index), config.max_rounds)
