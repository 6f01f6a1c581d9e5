"""Projected stochastic-approximation solver on the strategy simplex.

Each iteration simulates one regeneration cycle (or a small batch), forms
the cycle-sum estimator, optionally adjusts it with control variates, and
takes a projected step p <- proj(p + gamma_n * G).  For observable games
the update runs per signal; signals not visited in a cycle keep their
strategy row untouched.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InstabilityError
from .estimator import ControlVariateState, per_signal_G, sensing_controls, signal_counts
from .models import HARD_ARRIVAL_LIMIT, as_behavioral
from .rng import Stream, substream
from .simplex import SimplexPoint, project_simplex_array

_DOMAIN_SOLVE = 1


@dataclass(frozen=True)
class Harmonic:
    """Step sizes gamma_n = gamma0 / n, optionally divided by the model's
    mean-cycle-length approximation at the current strategy."""

    gamma0: float = 1.0
    dynamic: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.gamma0) and self.gamma0 > 0):
            raise ConfigurationError("gamma0 must be > 0")


@dataclass(frozen=True)
class LinearTruncation:
    """Cycle caps beta_n = ceil(kappa * n).

    A heuristic guard for systems that are unstable under part of the
    strategy space: early cycles are cut short, while the linearly growing
    cap is eventually never hit once the iterate settles in the stable
    region (cycle-length tails are geometric there).
    """

    kappa: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa >= 1.0):
            raise ConfigurationError("kappa must be >= 1")

    def cap(self, n):
        return int(math.ceil(self.kappa * n))


@dataclass
class RunConfig:
    iterations: int
    seed: int
    initial: object = None  # strategy rows; None means uniform
    step: Harmonic = field(default_factory=Harmonic)
    truncation: LinearTruncation = None
    control_variates: bool = False
    log_stride: int = None  # None: max(1, iterations // 10_000)
    batch_cycles: int = 1
    hard_limit: int = HARD_ARRIVAL_LIMIT

    def __post_init__(self):
        if int(self.iterations) < 1:
            raise ConfigurationError("iterations must be >= 1")
        if int(self.batch_cycles) < 1:
            raise ConfigurationError("batch_cycles must be >= 1")
        if self.log_stride is not None and int(self.log_stride) < 1:
            raise ConfigurationError("log_stride must be >= 1")
        if self.truncation is not None and not isinstance(
                self.truncation, LinearTruncation):
            raise ConfigurationError(
                "truncation must be a LinearTruncation or None")
        if not isinstance(self.step, Harmonic):
            raise ConfigurationError("step must be a Harmonic schedule")


@dataclass
class Trajectory:
    """Downsampled iterate log plus run totals."""

    iterations: list
    strategies: list  # (signal_count, k) snapshots
    final: np.ndarray
    signal_count: int
    k: int
    total_arrivals: int
    total_cycles: int
    cap_hits: int
    last_cap_hit: int
    wall_clock: float

    def final_strategy(self):
        """SimplexPoint for unobservable runs, list of rows otherwise."""
        if self.signal_count == 1:
            return SimplexPoint(self.final[0])
        return [SimplexPoint(row) for row in self.final]

    def csv_header(self):
        cols = ["iteration"]
        for s in range(self.signal_count):
            for a in range(self.k):
                cols.append("p_%d_%d" % (s, a))
        return ",".join(cols)

    def write_csv(self, fh):
        fh.write(self.csv_header() + "\n")
        for n, snap in zip(self.iterations, self.strategies):
            vals = [repr(float(v)) for v in snap.ravel()]
            fh.write(str(n) + "," + ",".join(vals) + "\n")


def _uniform_rows(signal_count, k):
    return np.full((signal_count, k), 1.0 / k)


def run(model, config):
    """Run the projected stochastic approximation and return a Trajectory."""
    n_iter = int(config.iterations)
    seed = int(config.seed)
    signal_count = model.signal_count
    k = model.k
    if config.initial is None:
        strategy = _uniform_rows(signal_count, k)
    else:
        strategy = as_behavioral(config.initial, k, signal_count).copy()

    if config.truncation is None and not model.stable_for_all_strategies:
        raise InstabilityError(
            "model %r is not stable for every strategy; set a truncation "
            "schedule to run it" % model.name)

    cv = None
    if config.control_variates:
        if model.control_dim < 1:
            raise ConfigurationError(
                "model %r exposes no control components" % model.name)
        if signal_count != 1:
            raise ConfigurationError(
                "control variates are supported for unobservable runs only")
        cv = ControlVariateState(k, model.control_dim)

    stride = config.log_stride
    if stride is None:
        stride = max(1, n_iter // 10_000)
    stride = int(stride)
    batch = int(config.batch_cycles)
    hard_limit = int(config.hard_limit)
    dynamic = config.step.dynamic
    gamma0 = config.step.gamma0

    logged_iters = []
    logged_strats = []
    total_arrivals = 0
    total_cycles = 0
    cap_hits = 0
    last_cap_hit = None
    t0 = time.perf_counter()

    for n in range(1, n_iter + 1):
        stream = Stream(substream(seed, _DOMAIN_SOLVE, n))
        cap = None if config.truncation is None else config.truncation.cap(n)
        g_cols = np.zeros((k, signal_count))
        c_sum = np.zeros(model.control_dim)
        seen = np.zeros(signal_count, dtype=bool)
        for _ in range(batch):
            record, arrivals = model.simulate_cycle_counted(
                strategy, cap, stream, hard_limit)
            g_cols += per_signal_G(record, signal_count)
            seen |= signal_counts(record, signal_count) > 0
            if cv is not None:
                c_sum += sensing_controls(record)
            total_arrivals += arrivals
            total_cycles += 1
            if record.truncated:
                cap_hits += 1
                last_cap_hit = n
        if batch > 1:
            g_cols /= batch
            c_sum /= batch

        if cv is not None:
            g_cols[:, 0] = cv.step(g_cols[:, 0], c_sum)

        divisor = model.ell_tilde(strategy) if dynamic else 1.0
        if not (math.isfinite(divisor) and divisor > 0.0):
            raise ConfigurationError(
                "dynamic step divisor must be positive and finite, got %r"
                % (divisor,))
        gamma = (gamma0 / divisor) / n

        for s in range(signal_count):
            if not seen[s]:
                continue
            row = project_simplex_array(strategy[s] + gamma * g_cols[:, s])
            if row.min() < 0.0 or abs(row.sum() - 1.0) > 1e-9:
                raise RuntimeError(
                    "iterate left the simplex at iteration %d: %r" % (n, row))
            strategy[s] = row

        if n % stride == 0 or n == n_iter:
            logged_iters.append(n)
            logged_strats.append(strategy.copy())

    return Trajectory(
        iterations=logged_iters,
        strategies=logged_strats,
        final=strategy.copy(),
        signal_count=signal_count,
        k=k,
        total_arrivals=int(total_arrivals),
        total_cycles=int(total_cycles),
        cap_hits=int(cap_hits),
        last_cap_hit=last_cap_hit,
        wall_clock=time.perf_counter() - t0,
    )


def run_unobservable(model, config):
    """Solve a game whose customers observe nothing (one common signal)."""
    if model.signal_count != 1:
        raise ConfigurationError(
            "run_unobservable needs a single-signal model; got %d signals"
            % model.signal_count)
    return run(model, config)


def run_observable(model, config):
    """Solve a game with per-signal strategies.

    With a single signal this is exactly run_unobservable: both are thin
    wrappers over the same loop, so the trajectories coincide bit for bit
    on the same seed.
    """
    return run(model, config)
