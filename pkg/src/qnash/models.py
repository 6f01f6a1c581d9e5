"""Queueing game models and regeneration-cycle simulation.

A model describes one station-joining game: which actions exist, what a
customer observes, and the conditional expected utility v-bar of every
action given the observed state.  Cycles regenerate at arrivals that find
the system empty, so consecutive cycles are independent and identically
distributed.  The heavy lifting happens in the kernels module.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .distributions import DistributionSpec, Exponential
from .errors import ConfigurationError, InstabilityError
from .simplex import SimplexPoint

HARD_ARRIVAL_LIMIT = 10_000_000


@dataclass
class CycleRecord:
    """Everything observed over one regeneration cycle.

    vbar_rows:    (L, k) conditional utilities, one row per decision epoch
    signals:      (L,) signal observed by each deciding arrival
    control_rows: (L, l) control-variate summands (l may be 0)
    cycle_length: L, at least 1
    truncated:    True when the cycle was cut off by a cap
    """

    vbar_rows: np.ndarray
    signals: np.ndarray
    control_rows: np.ndarray
    cycle_length: int
    truncated: bool

    def __post_init__(self):
        rows = np.asarray(self.vbar_rows, dtype=np.float64)
        sig = np.asarray(self.signals, dtype=np.int64)
        ctrl = np.asarray(self.control_rows, dtype=np.float64)
        n = int(self.cycle_length)
        if rows.ndim != 2 or rows.shape[1] < 2:
            raise ConfigurationError("vbar_rows must be (L, k) with k >= 2")
        if n < 1 or rows.shape[0] != n:
            raise ConfigurationError(
                "cycle_length must equal the row count and be >= 1")
        if sig.shape != (n,):
            raise ConfigurationError("signals must have one entry per row")
        if ctrl.ndim != 2 or ctrl.shape[0] != n:
            raise ConfigurationError("control_rows must have L rows")
        if sig.min(initial=0) < 0:
            raise ConfigurationError("signals must be nonnegative")
        self.vbar_rows = rows
        self.signals = sig
        self.control_rows = ctrl
        self.cycle_length = n
        self.truncated = bool(self.truncated)

    @property
    def k(self):
        return self.vbar_rows.shape[1]


def workload_recursion(state, station, work, inter_arrival):
    """One Lindley step for a vector of station workloads.

    The joining customer adds `work` to `station` (None means balk), then
    every station drains for `inter_arrival` time units, floored at zero.
    """
    state = np.asarray(state, dtype=np.float64)
    out = np.empty_like(state)
    for m in range(state.size):
        acc = state[m]
        if station is not None and m == station:
            acc = acc + work
        acc = acc - inter_arrival
        out[m] = acc if acc > 0.0 else 0.0
    return out


def as_behavioral(strategy, k, signal_count):
    """Normalize a strategy to a (signal_count, k) row-stochastic matrix.

    Accepts a SimplexPoint or 1-D vector (replicated over signals only when
    signal_count is 1), a sequence of SimplexPoints / rows, or a matrix.
    """
    if isinstance(strategy, SimplexPoint):
        rows = strategy.probs[None, :]
    elif isinstance(strategy, (list, tuple)) and strategy and isinstance(
            strategy[0], SimplexPoint):
        rows = np.stack([s.probs for s in strategy])
    else:
        rows = np.asarray(strategy, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows[None, :]
    if rows.shape != (signal_count, k):
        raise ConfigurationError(
            "strategy must have shape (%d, %d), got %s"
            % (signal_count, k, rows.shape))
    out = np.ascontiguousarray(rows, dtype=np.float64)
    for s in range(signal_count):
        SimplexPoint(out[s])  # validates each row
    return out


class GameModel:
    """Shared contract for the concrete games.

    Subclasses set k (>= 2 actions, the last one is always balking),
    signal_count, control_dim and stable_for_all_strategies, and implement
    _cycle returning (vbar_rows, signals, control_rows, arrivals, status).
    """

    name = "game"
    k = 2
    signal_count = 1
    control_dim = 0
    stable_for_all_strategies = True

    def _cycle(self, behavior, cap, stream, hard_limit):
        raise NotImplementedError

    def ell_tilde(self, behavior):
        """Mean-cycle-length approximation used by dynamic step sizing."""
        return 1.0

    def simulate_cycle(self, strategy, cap=None, rng=None,
                       hard_limit=HARD_ARRIVAL_LIMIT):
        """Simulate one regeneration cycle under the given strategy."""
        behavior = as_behavioral(strategy, self.k, self.signal_count)
        record, _ = self.simulate_cycle_counted(behavior, cap, rng, hard_limit)
        return record

    def simulate_cycle_counted(self, behavior, cap, rng, hard_limit):
        """Internal entry point: also reports the raw arrival count."""
        if rng is None:
            raise ConfigurationError("an rng Stream is required")
        capn = 0 if cap is None else int(cap)
        if cap is not None and capn < 1:
            raise ConfigurationError("cycle cap must be >= 1")
        rows, signals, controls, arrivals, status = self._cycle(
            behavior, capn, rng, int(hard_limit))
        if status == kernels.STATUS_HARD_LIMIT:
            raise InstabilityError(
                "cycle exceeded %d arrivals under strategy %s; the system "
                "looks unstable, consider a truncation schedule"
                % (hard_limit, np.array2string(behavior, precision=6)))
        record = CycleRecord(
            vbar_rows=rows, signals=signals, control_rows=controls,
            cycle_length=rows.shape[0],
            truncated=status == kernels.STATUS_TRUNCATED)
        return record, arrivals


def simulate_cycle(model, strategy, cap=None, rng=None,
                   hard_limit=HARD_ARRIVAL_LIMIT):
    """Module-level alias for GameModel.simulate_cycle."""
    return model.simulate_cycle(strategy, cap=cap, rng=rng,
                                hard_limit=hard_limit)


class ParallelQueuesModel(GameModel):
    """Unobservable parallel queues with linear utilities.

    Customers arrive by a renewal process and pick one of k-1 stations or
    balk.  Joining station m earns reward R_m and pays C_m per unit of
    (workload + own mean service).  A single station with exponential
    services is the plain unobservable M/M/1 joining game.
    """

    name = "parallel_queues"

    def __init__(self, services, interarrival, reward, cost,
                 value_fn=None):
        services = list(services)
        if not services:
            raise ConfigurationError("need at least one station")
        for s in services:
            if not isinstance(s, DistributionSpec):
                raise ConfigurationError(
                    "services must be DistributionSpec instances")
        if not isinstance(interarrival, DistributionSpec):
            raise ConfigurationError(
                "interarrival must be a DistributionSpec")
        m = len(services)
        self.services = services
        self.interarrival = interarrival
        self.rewards = np.broadcast_to(
            np.asarray(reward, dtype=np.float64), (m,)).copy()
        self.costs = np.broadcast_to(
            np.asarray(cost, dtype=np.float64), (m,)).copy()
        if not np.all(np.isfinite(self.rewards)):
            raise ConfigurationError("rewards must be finite")
        if not (np.all(np.isfinite(self.costs)) and np.all(self.costs > 0)):
            raise ConfigurationError("costs must be finite and positive")
        self.k = m + 1
        self.value_fn = value_fn
        self.service_means = np.array([s.mean() for s in services])
        codes_params = [s.kernel_params() for s in services]
        self._svc_codes = np.array([cp[0] for cp in codes_params],
                                   dtype=np.int64)
        self._svc_params = np.array([cp[1] for cp in codes_params],
                                    dtype=np.float64)
        ia_code, ia_params = interarrival.kernel_params()
        self._ia_code = ia_code
        self._ia_params = np.asarray(ia_params, dtype=np.float64)
        self.mean_interarrival = interarrival.mean()
        self.stable_for_all_strategies = bool(
            self.service_means.max() < self.mean_interarrival)

    def _cycle(self, behavior, cap, stream, hard_limit):
        if self.value_fn is not None:
            return self._cycle_custom(behavior, cap, stream, hard_limit)
        rows, status = kernels.simulate_parallel(
            self._svc_codes, self._svc_params, self._ia_code,
            self._ia_params, self.rewards, self.costs, self.service_means,
            behavior[0], cap, hard_limit, stream)
        n = rows.shape[0]
        return (rows, np.zeros(n, dtype=np.int64),
                np.zeros((n, 0), dtype=np.float64), n, status)

    def _cycle_custom(self, behavior, cap, stream, hard_limit):
        # Same walk as the kernel, but v-bar comes from the user callback.
        # Slower by construction; meant for nonstandard utility shapes.
        m = self.k - 1
        probs = [float(v) for v in behavior[0]]
        w = np.zeros(m)
        rows = []
        status = kernels.STATUS_OK
        while True:
            if rows and not w.any():
                break
            if cap > 0 and len(rows) >= cap:
                status = kernels.STATUS_TRUNCATED
                break
            if len(rows) >= hard_limit:
                status = kernels.STATUS_HARD_LIMIT
                break
            vals = np.asarray(self.value_fn(w.copy()), dtype=np.float64)
            if vals.shape != (self.k,):
                raise ConfigurationError(
                    "value_fn must return %d utilities" % self.k)
            rows.append(vals)
            u = stream.uniform()
            cum = 0.0
            a = self.k - 1
            for i in range(self.k - 1):
                cum += probs[i]
                if u < cum:
                    a = i
                    break
            y = self.services[a].sample(stream) if a < m else 0.0
            gap = self.interarrival.sample(stream)
            w = workload_recursion(w, a if a < m else None, y, gap)
        n = len(rows)
        return (np.asarray(rows), np.zeros(n, dtype=np.int64),
                np.zeros((n, 0), dtype=np.float64), n, status)


class SensingModel(GameModel):
    """Single server with a sensing option and an overflow queue.

    Action 1 pays a sensing cost, inspects server 1, and joins it when it
    is idle (otherwise falls back to queue 2).  Action 2 goes straight to
    queue 2.  Utilities are negative costs; both actions lead to service,
    so there is no balking column here.  Arrivals are Poisson.
    """

    name = "sensing"
    control_dim = 3

    def __init__(self, arrival_rate, service, sensing_cost, waiting_cost):
        if not (math.isfinite(arrival_rate) and arrival_rate > 0):
            raise ConfigurationError("arrival rate must be > 0")
        if not isinstance(service, DistributionSpec):
            raise ConfigurationError("service must be a DistributionSpec")
        if not (math.isfinite(sensing_cost) and sensing_cost >= 0):
            raise ConfigurationError("sensing cost must be >= 0")
        if not (math.isfinite(waiting_cost) and waiting_cost > 0):
            raise ConfigurationError("waiting cost must be > 0")
        self.arrival_rate = float(arrival_rate)
        self.service = service
        self.sensing_cost = float(sensing_cost)
        self.waiting_cost = float(waiting_cost)
        self.k = 2
        self.interarrival = Exponential(rate=self.arrival_rate)
        svc_code, svc_params = service.kernel_params()
        self._svc_code = svc_code
        self._svc_params = np.asarray(svc_params, dtype=np.float64)
        ia_code, ia_params = self.interarrival.kernel_params()
        self._ia_code = ia_code
        self._ia_params = np.asarray(ia_params, dtype=np.float64)
        self.service_mean = service.mean()
        self.service_rate = 1.0 / self.service_mean
        self.stable_for_all_strategies = bool(
            self.service_mean < self.interarrival.mean())

    def busy_fraction(self, p_sense):
        """Long-run busy fraction of server 1 at sensing probability p.

        Server 1 on its own is an M/G/1/1 loss system fed at rate
        lambda * p, so the busy fraction is lp / (lp + mu), insensitive to
        the service shape.
        """
        lp = self.arrival_rate * float(p_sense)
        return lp / (lp + self.service_rate)

    def ell_tilde(self, behavior):
        """Independence approximation of the mean cycle length.

        Treats server 1 as M/M/1/1 at rate lambda*p and queue 2 as an
        independent M/M/1 fed by non-sensing plus overflow traffic, then
        inverts the joint idle probability.  Coarse on purpose; it only
        rescales the step size.
        """
        behavior = np.atleast_2d(np.asarray(behavior, dtype=np.float64))
        p = float(behavior[0, 0])
        lam = self.arrival_rate
        mu = self.service_rate
        lam1 = lam * p
        pi0_1 = mu / (mu + lam1)
        lam2 = lam * (1.0 - p + lam1 / (lam1 + mu))
        pi0_2 = 1.0 - lam2 / mu
        if pi0_2 <= 0.0 or pi0_1 <= 0.0:
            raise ConfigurationError(
                "mean cycle length approximation is not positive at "
                "p=%.6g (overflow queue unstable in the approximation)" % p)
        return 1.0 / (pi0_1 * pi0_2)

    def _cycle(self, behavior, cap, stream, hard_limit):
        p_sense = float(behavior[0, 0])
        rows, controls, status = kernels.simulate_sensing(
            self._svc_code, self._svc_params, self._ia_code, self._ia_params,
            self.sensing_cost, self.waiting_cost, p_sense, self.service_mean,
            self.busy_fraction(p_sense), cap, hard_limit, stream)
        n = rows.shape[0]
        return rows, np.zeros(n, dtype=np.int64), controls, n, status


class ObservableQueueModel(GameModel):
    """Single FCFS queue whose arrivals observe the queue before deciding.

    The signal is the number of customers in the system.  Arrivals seeing
    more than the threshold K = floor(R * mu / C) would earn a negative
    utility even with an empty-looking future, so they balk outright and
    are not decision epochs.  Strategies are per-signal join probabilities.
    """

    name = "observable_queue"

    def __init__(self, interarrival, service, reward, cost):
        if not isinstance(interarrival, DistributionSpec):
            raise ConfigurationError(
                "interarrival must be a DistributionSpec")
        if not isinstance(service, DistributionSpec):
            raise ConfigurationError("service must be a DistributionSpec")
        if not (math.isfinite(reward) and reward > 0):
            raise ConfigurationError("reward must be > 0")
        if not (math.isfinite(cost) and cost > 0):
            raise ConfigurationError("cost must be > 0")
        self.interarrival = interarrival
        self.service = service
        self.reward = float(reward)
        self.cost = float(cost)
        self.k = 2
        self.service_mean = service.mean()
        self.service_rate = 1.0 / self.service_mean
        self.threshold = int(math.floor(
            self.reward * self.service_rate / self.cost))
        self.signal_count = self.threshold + 1
        svc_code, svc_params = service.kernel_params()
        self._svc_code = svc_code
        self._svc_params = np.asarray(svc_params, dtype=np.float64)
        ia_code, ia_params = interarrival.kernel_params()
        self._ia_code = ia_code
        self._ia_params = np.asarray(ia_params, dtype=np.float64)
        # forced balking bounds the population by K+1, so cycles always end
        self.stable_for_all_strategies = True

    def _cycle(self, behavior, cap, stream, hard_limit):
        rows, signals, arrivals, status = kernels.simulate_observable(
            self._svc_code, self._svc_params, self._ia_code, self._ia_params,
            self.reward, self.cost, self.service_mean, self.threshold,
            behavior, cap, hard_limit, stream)
        n = rows.shape[0]
        return (rows, signals, np.zeros((n, 0), dtype=np.float64),
                arrivals, status)
