"""Probability simplex geometry: points, projections, tangent maps.

The strategy iterates of the solver live on the simplex, and every update
ends with a Euclidean projection back onto it.  Projection onto the simplex
itself uses the classic sort-and-shift algorithm; a box-constrained variant
(bisection on the shift) covers capped strategies.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

SUM_TOL = 1e-9
# A point this close to feasible is returned untouched by project_simplex,
# which makes the projection bitwise idempotent.
_FEASIBLE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """A probability vector over at least two actions."""

    probs: np.ndarray = field()

    def __post_init__(self):
        arr = np.ascontiguousarray(self.probs, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 2:
            raise ConfigurationError(
                "a simplex point needs at least 2 coordinates, got shape %s"
                % (arr.shape,))
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("simplex coordinates must be finite")
        if arr.min() < 0.0:
            raise ConfigurationError(
                "simplex coordinates must be nonnegative, got %r" % (arr,))
        total = float(arr.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ConfigurationError(
                "simplex coordinates must sum to 1 within %g, got %.17g"
                % (SUM_TOL, total))
        if total != 1.0:
            arr = arr / total
        object.__setattr__(self, "probs", arr)

    @property
    def k(self):
        return self.probs.size

    def __len__(self):
        return self.probs.size

    def __getitem__(self, i):
        return float(self.probs[i])

    def as_array(self):
        return self.probs.copy()


def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise ConfigurationError(
            "projection input must be finite, got %r" % (x,))


def project_simplex_array(x):
    """Euclidean projection of a vector onto the probability simplex.

    Sort the coordinates in decreasing order, find the largest prefix whose
    shifted values stay positive, and subtract the prefix shift.  O(k log k).
    Points already feasible (within 1e-12) are returned unchanged so that
    the projection is exactly idempotent.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    _check_finite(x)
    total = float(x.sum())
    if abs(total - 1.0) <= _FEASIBLE_TOL and float(x.min()) >= 0.0:
        return x.copy()
    u = np.sort(x)[::-1]
    prefix = np.cumsum(u)
    j = np.arange(1, x.size + 1)
    positive = u - (prefix - 1.0) / j > 0.0
    rho = int(np.nonzero(positive)[0][-1])  # positive[0] always holds
    tau = (prefix[rho] - 1.0) / (rho + 1.0)
    return np.maximum(x - tau, 0.0)


def project_simplex(x):
    """Like :func:`project_simplex_array` but wrapped as a SimplexPoint."""
    return SimplexPoint(project_simplex_array(x))


def project_hyperplane(x):
    """Project onto the tangent hyperplane {v : sum(v) = 0}.

    Subtracting the coordinate mean is the action of H = I - (1/k) 11'.
    Composing the update direction with this map leaves the subsequent
    simplex projection unchanged, which is handy for variance analysis.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    _check_finite(x)
    return x - x.mean()


def project_capped_simplex(x, lower=0.0, upper=1.0):
    """Projection onto the simplex intersected with a coordinate box.

    Solves min ||q - x|| subject to sum(q) = 1 and lower <= q <= upper by
    bisecting on the common shift tau in q_i = clip(x_i - tau, lo_i, hi_i),
    then resolving tau exactly on the free coordinate set.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    _check_finite(x)
    k = x.size
    lo = np.broadcast_to(np.asarray(lower, dtype=np.float64), (k,)).copy()
    hi = np.broadcast_to(np.asarray(upper, dtype=np.float64), (k,)).copy()
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ConfigurationError("box bounds must be finite")
    if np.any(lo > hi):
        raise ConfigurationError("box lower bounds exceed upper bounds")
    if lo.sum() > 1.0 + SUM_TOL or hi.sum() < 1.0 - SUM_TOL:
        raise ConfigurationError("box does not intersect the simplex")

    def mass(tau):
        return np.clip(x - tau, lo, hi).sum()

    t_lo = float((x - hi).min()) - 1.0
    t_hi = float((x - lo).max()) + 1.0
    for _ in range(200):
        mid = 0.5 * (t_lo + t_hi)
        if mass(mid) > 1.0:
            t_lo = mid
        else:
            t_hi = mid
    tau = 0.5 * (t_lo + t_hi)
    q = np.clip(x - tau, lo, hi)
    free = (q > lo) & (q < hi)
    if np.any(free):
        clamped_mass = np.where(free, 0.0, q).sum()
        tau = (x[free].sum() + clamped_mass - 1.0) / free.sum()
        q = np.clip(x - tau, lo, hi)
    return q
