"""IRS-assisted two-user cooperation in wireless powered networks.

Forward rate/energy model, SDR-based max-min optimizer with Gaussian
randomization, benchmark schemes and a seeded Monte-Carlo harness.
"""

from .baselines import SchemeId, coop_no_irs, indep_no_irs, indep_with_irs, run_scheme
from .channel import (ChannelRealization, LiftedChannels, PathLossModel, ScenarioGeometry,
                      composite_gamma, lift, path_loss, sample_realization)
from .rates import Allocation, PhaseConfig, SystemParams, check_feasibility, evaluate
from .sdr import (MAXMIN, Objective, RecoveredSolution, maximize_common_throughput,
                  maximize_weighted_sum)

__version__ = "0.1.0"

__all__ = [
    "Allocation", "ChannelRealization", "LiftedChannels", "MAXMIN", "Objective", "PathLossModel",
    "PhaseConfig", "RecoveredSolution", "ScenarioGeometry", "SchemeId", "SystemParams",
    "check_feasibility", "composite_gamma", "coop_no_irs", "evaluate", "indep_no_irs",
    "indep_with_irs", "lift", "maximize_common_throughput", "maximize_weighted_sum",
    "path_loss", "run_scheme", "sample_realization",
]
