"""Statistical equilibrium verification and closed-form oracles.

Utilities of a fixed strategy are estimated by the regenerative ratio
estimator: cycle sums of v-bar divided by cycle decision counts.  Batch
means over equal-count cycle batches give confidence intervals, and the
epsilon gap compares the best CI upper end against the CI lower end of the
played mix.  Signals are handled separately so observable strategies can
be certified per signal; unobservable runs have exactly one signal.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ConfigurationError
from .models import as_behavioral
from .rng import Stream, substream

_DOMAIN_VERIFY = 2


@dataclass
class ValueEstimate:
    """Per-signal, per-action utility estimates with CI half-widths."""

    values: np.ndarray       # (signal_count, k); nan where never observed
    half_widths: np.ndarray  # (signal_count, k); inf where not estimable
    observed: np.ndarray     # (signal_count,) bool
    strategy: np.ndarray     # (signal_count, k)
    alpha: float
    batches: int
    cycles: int
    total_arrivals: int

    def to_dict(self):
        return {
            "values": self.values.tolist(),
            "half_widths": self.half_widths.tolist(),
            "observed": self.observed.tolist(),
            "strategy": self.strategy.tolist(),
            "alpha": self.alpha,
            "batches": self.batches,
            "cycles": self.cycles,
            "total_arrivals": self.total_arrivals,
        }


def estimate_values(model, strategy, cycles=None, arrivals=None, batches=30,
                    alpha=0.005, seed=0, hard_limit=None):
    """Estimate the utility of every action under a fixed strategy.

    Either `cycles` (exact cycle count) or `arrivals` (simulate until this
    many decision epochs have accumulated) must be given.  Each cycle runs
    on its own substream of `seed`, so the result does not depend on how
    the work would be sharded.  Cycles beyond the largest multiple of
    `batches` are dropped before batching.
    """
    from .models import HARD_ARRIVAL_LIMIT
    if hard_limit is None:
        hard_limit = HARD_ARRIVAL_LIMIT
    if (cycles is None) == (arrivals is None):
        raise ConfigurationError("give exactly one of cycles or arrivals")
    batches = int(batches)
    if batches < 2:
        raise ConfigurationError("need at least 2 batches")
    if not (0.0 < alpha < 0.5):
        raise ConfigurationError("alpha must lie in (0, 0.5)")
    if cycles is not None and int(cycles) < batches:
        raise ConfigurationError("need at least one cycle per batch")

    behavior = as_behavioral(strategy, model.k, model.signal_count)
    S = model.signal_count
    k = model.k

    from .estimator import per_signal_G, signal_counts

    size = 4096
    g_store = np.empty((size, k, S))
    n_store = np.empty((size, S), dtype=np.int64)
    total_epochs = 0
    total_arrivals = 0
    i = 0
    while True:
        if cycles is not None:
            if i >= int(cycles):
                break
        elif total_epochs >= int(arrivals) and i >= batches:
            break
        if i == size:
            size *= 2
            g_store = np.concatenate(
                [g_store, np.empty_like(g_store)], axis=0)
            n_store = np.concatenate(
                [n_store, np.empty_like(n_store)], axis=0)
        stream = Stream(substream(int(seed), _DOMAIN_VERIFY, i))
        record, arr = model.simulate_cycle_counted(
            behavior, None, stream, int(hard_limit))
        g_store[i] = per_signal_G(record, S)
        n_store[i] = signal_counts(record, S)
        total_epochs += record.cycle_length
        total_arrivals += arr
        i += 1

    n_cycles = i
    per_batch = n_cycles // batches
    n_used = per_batch * batches
    g_all = g_store[:n_used]                   # (n_used, k, S)
    n_all = n_store[:n_used]                   # (n_used, S)

    g_total = g_all.sum(axis=0)                # (k, S)
    n_total = n_all.sum(axis=0)                # (S,)
    observed = n_total > 0

    values = np.full((S, k), np.nan)
    half_widths = np.full((S, k), np.inf)
    g_batch = g_all.reshape(batches, per_batch, k, S).sum(axis=1)
    n_batch = n_all.reshape(batches, per_batch, S).sum(axis=1)
    tq = float(stats.t.ppf(1.0 - alpha / 2.0, batches - 1))
    for s in range(S):
        if not observed[s]:
            continue
        values[s] = g_total[:, s] / n_total[s]
        if np.any(n_batch[:, s] == 0):
            continue  # signal too rare to batch; CI stays infinite
        ratios = g_batch[:, :, s] / n_batch[:, s, None]   # (batches, k)
        sd = ratios.std(axis=0, ddof=1)
        half_widths[s] = tq * sd / math.sqrt(batches)

    return ValueEstimate(
        values=values, half_widths=half_widths, observed=observed,
        strategy=behavior, alpha=float(alpha), batches=batches,
        cycles=n_used, total_arrivals=int(total_arrivals))


@dataclass
class EpsilonCertificate:
    """Result of an epsilon-gap test.

    eps_hat is the plug-in gap, eps_hi its conservative upper end built
    from the per-action CIs (best action at the upper ends, played mix at
    the lower ends).  joint_confidence applies a Bonferroni split over
    every CI with a nonzero width.
    """

    eps_hat: float
    eps_hi: float
    alpha: float
    joint_confidence: float
    per_signal_eps_hat: np.ndarray
    per_signal_eps_hi: np.ndarray

    def to_dict(self):
        return {
            "eps_hat": self.eps_hat,
            "eps_hi": self.eps_hi,
            "alpha": self.alpha,
            "joint_confidence": self.joint_confidence,
            "per_signal_eps_hat": self.per_signal_eps_hat.tolist(),
            "per_signal_eps_hi": self.per_signal_eps_hi.tolist(),
        }


def epsilon_gap(estimate, strategy=None):
    """Gap between the best response and the played strategy.

    Signals never observed under the strategy carry no decision mass and
    are skipped.  Returns an EpsilonCertificate; certification against a
    target is a plain comparison with eps_hi.
    """
    if strategy is None:
        behavior = estimate.strategy
    else:
        behavior = as_behavioral(
            strategy, estimate.values.shape[1], estimate.values.shape[0])
    S, k = estimate.values.shape
    eps_hat_s = np.zeros(S)
    eps_hi_s = np.zeros(S)
    n_random = 0
    for s in range(S):
        if not estimate.observed[s]:
            continue
        u = estimate.values[s]
        hw = estimate.half_widths[s]
        p = behavior[s]
        played = float(p @ u)
        eps_hat_s[s] = max(0.0, float(u.max() - played))
        played_lo = float(p @ (u - hw))
        eps_hi_s[s] = max(0.0, float((u + hw).max() - played_lo))
        n_random += int(np.count_nonzero(hw > 0))
    eps_hat = float(eps_hat_s.max())
    eps_hi = float(eps_hi_s.max())
    return EpsilonCertificate(
        eps_hat=eps_hat, eps_hi=eps_hi, alpha=estimate.alpha,
        joint_confidence=max(0.0, 1.0 - n_random * estimate.alpha),
        per_signal_eps_hat=eps_hat_s, per_signal_eps_hi=eps_hi_s)


@dataclass
class MM1Oracles:
    """Closed forms for the M/M/1 joining game with reward R and cost C."""

    lam: float
    mu: float
    reward: float
    cost: float
    p_e: float
    K: int

    def workload_at_arrivals(self, a):
        """Mean workload seen by Poisson arrivals at total join rate a."""
        if a < 0:
            raise ConfigurationError("arrival rate must be >= 0")
        if a >= self.mu:
            return math.inf
        return a / (self.mu * (self.mu - a))

    def joining_utility(self, p):
        """Utility of joining when everyone joins with probability p."""
        w = self.workload_at_arrivals(p * self.lam)
        return self.reward - self.cost * (w + 1.0 / self.mu)

    def to_dict(self):
        return {"p_e": self.p_e, "K": self.K}


def mm1_oracles(lam, mu, reward, cost):
    """Equilibrium join probability and Naor threshold for M/M/1.

    The unobservable equilibrium solves R - C (w(a) + 1/mu) = 0 for the
    joining rate a and clamps a/lambda to [0, 1]; the observable threshold
    is K = floor(R mu / C).
    """
    vals = (lam, mu, reward, cost)
    if not all(math.isfinite(v) for v in vals):
        raise ConfigurationError("oracle parameters must be finite")
    if mu <= 0:
        raise ConfigurationError("service rate must be > 0")
    if lam <= 0:
        raise ConfigurationError("arrival rate must be > 0")
    if cost <= 0:
        raise ConfigurationError("waiting cost must be > 0")
    t = reward / cost - 1.0 / mu
    if t <= 0:
        p_e = 0.0
    else:
        a_star = t * mu * mu / (1.0 + t * mu)
        p_e = min(1.0, a_star / lam)
    threshold = max(0, int(math.floor(reward * mu / cost)))
    return MM1Oracles(lam=float(lam), mu=float(mu), reward=float(reward),
                      cost=float(cost), p_e=float(p_e), K=threshold)
