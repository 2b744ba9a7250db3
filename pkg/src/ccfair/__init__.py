"""Quality-based network formation under UR, PA and ExtremePA recommenders:
Monte Carlo simulation, exact absorbing-chain analysis, and individual
fairness metrics for content creators."""

from .chain import (
    ChainAnalysis,
    StateSpace,
    analyze,
    analyze_exact,
    enumerate_reachable,
    thm5_closed_form_check,
    transition_row,
)
from .engine import (
    BatchReport,
    RunOutcome,
    SimConfig,
    run_batch,
    run_once,
    simulate_runs,
    tie_probability_experiment,
)
from .errors import CapacityError, ConsistencyError, InvalidArgumentError
from .fairness import ex_ante_report, ex_post_report, is_cc_i_fair, is_fair, is_strictly_fair
from .model import (
    FullNetwork,
    ModelParams,
    ReducedState,
    apply_round,
    apply_round_full,
    follow_decision,
    project,
)
from .recommenders import RecommenderKind, is_absorbing, rec_probabilities, sample_round

__version__ = "0.1.0"
