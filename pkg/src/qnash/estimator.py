"""Cycle-sum estimators and control-variate adjustment.

The core identity: summing the conditional utilities over one cycle gives
an estimator whose expectation is the mean cycle length times the utility
vector of the played strategy.  Both factors are strategy-dependent, but
the scaling is a positive scalar, which is all the projected update needs.
"""

import numpy as np

from .errors import ConfigurationError


def per_signal_G(cycle, signal_count=None):
    """Per-signal cycle sums, shape (k, signal_count).

    Column s accumulates the v-bar rows of the decision epochs that saw
    signal s, in arrival order.  Summing the columns reproduces raw_G
    bit for bit because raw_G is defined through this decomposition.
    """
    rows = cycle.vbar_rows
    signals = cycle.signals
    if signal_count is None:
        signal_count = int(signals.max()) + 1
    else:
        signal_count = int(signal_count)
        if signals.max(initial=0) >= signal_count:
            raise ConfigurationError(
                "cycle contains signal %d outside range(%d)"
                % (int(signals.max()), signal_count))
    if signal_count == 1:
        return rows.sum(axis=0)[:, None]
    out = np.zeros((signal_count, rows.shape[1]), dtype=np.float64)
    np.add.at(out, signals, rows)
    return np.ascontiguousarray(out.T)


def raw_G(cycle):
    """Cycle sum of the v-bar rows, one entry per action."""
    return per_signal_G(cycle).sum(axis=1)


def signal_counts(cycle, signal_count):
    """How many decision epochs of the cycle saw each signal."""
    return np.bincount(cycle.signals, minlength=int(signal_count)).astype(
        np.int64)


def sensing_controls(cycle):
    """Cycle sums of the sensing model's three control components."""
    if cycle.control_rows.shape[1] == 0:
        raise ConfigurationError("cycle carries no control rows")
    return cycle.control_rows.sum(axis=0)


class ControlVariateState:
    """Running least-squares fit of the estimator on the control sums.

    Keeps sums of outer products over all updates (no windowing).  The
    adjustment G - Psi C with Psi = S_GC S_CC^{-1} is skipped while fewer
    than warmup_min pairs have been seen or when S_CC is ill conditioned,
    in which case the raw estimator passes through unchanged.
    """

    def __init__(self, k, control_dim, warmup_min=50, cond_limit=1e8):
        if control_dim < 1:
            raise ConfigurationError("control dimension must be >= 1")
        self.k = int(k)
        self.control_dim = int(control_dim)
        self.warmup_min = int(warmup_min)
        self.cond_limit = float(cond_limit)
        self.count = 0
        self._sum_gc = np.zeros((self.k, self.control_dim))
        self._sum_cc = np.zeros((self.control_dim, self.control_dim))

    def update(self, G, C):
        G = np.asarray(G, dtype=np.float64).reshape(self.k)
        C = np.asarray(C, dtype=np.float64).reshape(self.control_dim)
        self._sum_gc += np.outer(G, C)
        self._sum_cc += np.outer(C, C)
        self.count += 1

    def coefficient(self):
        """Current Psi estimate, or None while the guard is active."""
        if self.count < max(self.warmup_min, 2):
            return None
        norm = 1.0 / (self.count - 1)
        sigma_cc = self._sum_cc * norm
        if np.linalg.cond(sigma_cc) > self.cond_limit:
            return None
        sigma_gc = self._sum_gc * norm
        return sigma_gc @ np.linalg.inv(sigma_cc)

    def adjust(self, G, C):
        G = np.asarray(G, dtype=np.float64).reshape(self.k)
        C = np.asarray(C, dtype=np.float64).reshape(self.control_dim)
        psi = self.coefficient()
        if psi is None:
            return G.copy()
        return G - psi @ C

    def step(self, G, C):
        """update() then adjust(), the order used by the solver loop."""
        self.update(G, C)
        return self.adjust(G, C)


def cv_adjust(state, G, C):
    """Functional form of ControlVariateState.step."""
    return state.step(G, C)
