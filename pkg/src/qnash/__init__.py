"""Simulation-based equilibrium solver for queueing games.

Players arrive to a service system and pick actions (which queue to
join, whether to sense the server, whether to join at a given queue
length) without coordinating.  The solver runs a projected stochastic
approximation on the strategy simplex, driven by unbiased utility
estimates from regenerative busy-cycle simulation, and certifies the
result with an epsilon-equilibrium confidence bound.
"""

from .distributions import (BetaShiftScale, Deterministic, DistributionSpec,
                            Exponential, Gamma, ScaledBernoulli, Uniform,
                            from_config, sample_many)
from .engine import (Harmonic, LinearTruncation, RunConfig, Trajectory, run,
                     run_observable, run_unobservable)
from .errors import ConfigurationError, InstabilityError
from .estimator import (ControlVariateState, cv_adjust, per_signal_G, raw_G,
                        sensing_controls, signal_counts)
from .models import (CycleRecord, GameModel, ObservableQueueModel,
                     ParallelQueuesModel, SensingModel, as_behavioral,
                     simulate_cycle, workload_recursion)
from .simplex import (SimplexPoint, project_capped_simplex, project_hyperplane,
                      project_simplex, project_simplex_array)
from .verify import (EpsilonCertificate, MM1Oracles, ValueEstimate,
                     epsilon_gap, estimate_values, mm1_oracles)

__version__ = "0.1.0"

__all__ = [
    "BetaShiftScale", "ConfigurationError", "ControlVariateState",
    "CycleRecord", "Deterministic", "DistributionSpec", "EpsilonCertificate",
    "Exponential", "Gamma", "GameModel", "Harmonic", "InstabilityError",
    "LinearTruncation", "MM1Oracles", "ObservableQueueModel",
    "ParallelQueuesModel", "RunConfig", "ScaledBernoulli", "SensingModel",
    "SimplexPoint", "Trajectory", "Uniform", "ValueEstimate", "as_behavioral",
    "cv_adjust", "epsilon_gap", "estimate_values", "from_config",
    "mm1_oracles", "per_signal_G", "project_capped_simplex",
    "project_hyperplane", "project_simplex", "project_simplex_array", "raw_G",
    "run", "run_observable", "run_unobservable", "sample_many",
    "sensing_controls", "signal_counts", "simulate_cycle",
    "workload_recursion",
]
