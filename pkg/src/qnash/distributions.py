"""Service and inter-arrival time distributions.

Each distribution is a small frozen dataclass with an exact mean() and a
sample() drawing from a Stream.  Specs are also representable as plain
mappings ({"kind": "gamma", "shape": 0.1, "scale": 11}) for config files,
and as a (code, params) pair consumed by the simulation kernels.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ConfigurationError

# Kernel dispatch codes, shared with _kernels_py / _kernels.pyx.
CODE_DETERMINISTIC = 0
CODE_EXPONENTIAL = 1
CODE_GAMMA = 2
CODE_UNIFORM = 3
CODE_BETA_SHIFT_SCALE = 4
CODE_SCALED_BERNOULLI = 5


class DistributionSpec:
    """Base class; concrete specs implement mean, sample and kernel_params."""

    kind = None

    def mean(self):
        raise NotImplementedError

    def sample(self, stream):
        raise NotImplementedError

    def kernel_params(self):
        """Return (code, (a, b, c, d)) for the simulation kernels."""
        raise NotImplementedError

    def to_config(self):
        out = {"kind": self.kind}
        out.update(self.__dict__)
        return out


@dataclass(frozen=True)
class Deterministic(DistributionSpec):
    value: float

    kind = "deterministic"

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise ConfigurationError("deterministic value must be >= 0")

    def mean(self):
        return self.value

    def sample(self, stream):
        return self.value

    def kernel_params(self):
        return CODE_DETERMINISTIC, (self.value, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Exponential(DistributionSpec):
    rate: float

    kind = "exponential"

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ConfigurationError("exponential rate must be > 0")

    def mean(self):
        return 1.0 / self.rate

    def sample(self, stream):
        return rng.exponential(stream, self.rate)

    def kernel_params(self):
        return CODE_EXPONENTIAL, (self.rate, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Gamma(DistributionSpec):
    shape: float
    scale: float

    kind = "gamma"

    def __post_init__(self):
        if not (math.isfinite(self.shape) and self.shape > 0.0):
            raise ConfigurationError("gamma shape must be > 0")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ConfigurationError("gamma scale must be > 0")

    def mean(self):
        return self.shape * self.scale

    def sample(self, stream):
        return rng.standard_gamma(stream, self.shape) * self.scale

    def kernel_params(self):
        return CODE_GAMMA, (self.shape, self.scale, 0.0, 0.0)


@dataclass(frozen=True)
class Uniform(DistributionSpec):
    lo: float
    hi: float

    kind = "uniform"

    def __post_init__(self):
        ok = (math.isfinite(self.lo) and math.isfinite(self.hi)
              and 0.0 <= self.lo < self.hi)
        if not ok:
            raise ConfigurationError("uniform needs 0 <= lo < hi")

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def sample(self, stream):
        return rng.uniform_interval(stream, self.lo, self.hi)

    def kernel_params(self):
        return CODE_UNIFORM, (self.lo, self.hi, 0.0, 0.0)


@dataclass(frozen=True)
class BetaShiftScale(DistributionSpec):
    """shift + scale * Beta(alpha, beta)."""

    alpha: float
    beta: float
    shift: float
    scale: float

    kind = "beta_shift_scale"

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ConfigurationError("beta alpha must be > 0")
        if not (math.isfinite(self.beta) and self.beta > 0.0):
            raise ConfigurationError("beta beta must be > 0")
        if not (math.isfinite(self.shift) and self.shift >= 0.0):
            raise ConfigurationError("beta shift must be >= 0")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ConfigurationError("beta scale must be > 0")

    def mean(self):
        return self.shift + self.scale * self.alpha / (self.alpha + self.beta)

    def sample(self, stream):
        return self.shift + self.scale * rng.beta_variate(
            stream, self.alpha, self.beta)

    def kernel_params(self):
        return CODE_BETA_SHIFT_SCALE, (self.alpha, self.beta,
                                       self.shift, self.scale)


@dataclass(frozen=True)
class ScaledBernoulli(DistributionSpec):
    """value with probability success_prob, otherwise 0."""

    success_prob: float
    value: float

    kind = "scaled_bernoulli"

    def __post_init__(self):
        if not (math.isfinite(self.success_prob)
                and 0.0 <= self.success_prob <= 1.0):
            raise ConfigurationError("success_prob must lie in [0, 1]")
        if not (math.isfinite(self.value) and self.value > 0.0):
            raise ConfigurationError("scaled bernoulli value must be > 0")

    def mean(self):
        return self.success_prob * self.value

    def sample(self, stream):
        return self.value if stream.uniform() < self.success_prob else 0.0

    def kernel_params(self):
        return CODE_SCALED_BERNOULLI, (self.success_prob, self.value, 0.0, 0.0)


_KINDS = {cls.kind: cls for cls in (
    Deterministic, Exponential, Gamma, Uniform, BetaShiftScale,
    ScaledBernoulli)}


def from_config(mapping):
    """Build a DistributionSpec from a {"kind": ..., ...} mapping."""
    if not isinstance(mapping, dict):
        raise ConfigurationError(
            "distribution config must be a mapping, got %r" % (mapping,))
    data = dict(mapping)
    kind = data.pop("kind", None)
    cls = _KINDS.get(kind)
    if cls is None:
        raise ConfigurationError(
            "unknown distribution kind %r (expected one of %s)"
            % (kind, sorted(_KINDS)))
    try:
        return cls(**{key: float(val) for key, val in data.items()})
    except TypeError as exc:
        raise ConfigurationError(
            "bad parameters for distribution %r: %s" % (kind, exc)) from exc


def sample_many(spec, n, stream):
    """Draw n samples into an array, using the compiled kernel if present."""
    from . import kernels
    code, params = spec.kernel_params()
    return kernels.sample_many(code, np.asarray(params, dtype=np.float64),
                               int(n), stream)
