"""Monte Carlo vs exact-chain comparisons in units of standard error."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .chain import ChainAnalysis
from .engine import BatchReport


@dataclass(frozen=True)
class Comparison:
    quantity: str
    exact: float
    estimate: float
    sigma: float

    @property
    def z(self) -> float:
        diff = self.estimate - self.exact
        if self.sigma == 0:
            return 0.0 if abs(diff) <= 1e-12 else math.inf
        return diff / self.sigma

    def within(self, k: float = 3.0) -> bool:
        return abs(self.z) <= k


def binomial_sigma(p: float, N: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / N)


def compare(report: BatchReport, analysis: ChainAnalysis) -> list[Comparison]:
    """Mean time, per-CC fairness and mean final counts against exact values.

    Frequencies use the binomial standard error at the exact probability;
    means use the sample standard error.
    """
    N = report.n_absorbed
    out = [
        Comparison("mean_time", analysis.mu_empty, report.mean_time, report.std_time / math.sqrt(N)),
        Comparison(
            "fully_fair",
            analysis.exact_fully_fair,
            report.fully_fair_freq,
            binomial_sigma(analysis.exact_fully_fair, N),
        ),
    ]
    for i, (p, est) in enumerate(zip(analysis.exact_fairness, report.cc_fair_freq), start=1):
        out.append(Comparison(f"cc_fair_{i}", float(p), est, binomial_sigma(float(p), N)))
    for i, (mu, est, sd) in enumerate(
        zip(analysis.exact_mean_counts, report.mean_final_counts, report.std_final_counts), start=1
    ):
        out.append(Comparison(f"mean_count_{i}", float(mu), est, sd / math.sqrt(N)))
    return out
