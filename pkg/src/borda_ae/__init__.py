"""Active context and action selection for offline contextual dueling bandits."""
__version__ = "0.1.0"

from ._backend import BACKEND
from .acquisition import (STRATEGIES, CandidateGrids, propose_duel, select_action_optimistic,
                          select_context)
from .duel_model import BetaSchedule, BordaEstimate, DuelObservation
from .env import SyntheticEnv, sample_env
from .kernels import KernelInputError, KernelSpec, eval_kernel, gram_matrix
from .krr import NumericalError, PosteriorState, fit, info_gain_increment, predict, update
from .policy import LowerEnvelope, PolicyTable, absorb_round, extract_policy, regret_profile

__all__ = [
    "BACKEND", "STRATEGIES", "BetaSchedule", "BordaEstimate", "CandidateGrids",
    "DuelObservation", "KernelInputError", "KernelSpec", "LowerEnvelope", "NumericalError",
    "PolicyTable", "PosteriorState", "SyntheticEnv", "absorb_round", "eval_kernel",
    "extract_policy", "fit", "gram_matrix", "info_gain_increment", "predict",
    "propose_duel", "regret_profile", "sample_env", "select_action_optimistic",
    "select_context", "update",
]
