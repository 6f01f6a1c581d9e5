"""Counter-based random number streams.

Every simulation draws from a SplitMix64 stream.  A stream is identified by
a 64-bit state; independent substreams are derived from a master seed and an
integer path (domain tag, iteration index, ...) by hashing.  The compiled
kernels implement the exact same update and output functions, so a cycle
simulated by the C path and by the Python path consumes identical variates.

All transforms below are scalar and written without library RNGs on purpose:
the byte-for-byte reproducibility contract spans two implementations, which
rules out opaque generator internals.
"""

import math

MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_TWO_PI = 6.283185307179586


def mix64(z):
    """SplitMix64 finalizer, a 64-bit avalanche permutation."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def substream(master_seed, *path):
    """Derive an independent stream state from a master seed and a path.

    The path is a tuple of integers, e.g. (domain, iteration).  Hashing is a
    chain of SplitMix64 finalizers, so nearby paths give unrelated states.
    """
    s = master_seed & MASK64
    for part in path:
        s = mix64(s ^ mix64((int(part) + _GAMMA) & MASK64))
    return s


class Stream:
    """A SplitMix64 stream holding a single 64-bit state."""

    __slots__ = ("state",)

    def __init__(self, state):
        self.state = int(state) & MASK64

    def next_u64(self):
        self.state = (self.state + _GAMMA) & MASK64
        return mix64(self.state)

    def uniform(self):
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 1.1102230246251565e-16  # 2**-53

    def copy(self):
        return Stream(self.state)


# ---------------------------------------------------------------------------
# Variate transforms.  The compiled kernels replicate these line for line;
# any change here must be mirrored in _kernels.pyx.
# ---------------------------------------------------------------------------

def standard_normal(stream):
    """Box-Muller, one deviate per call (the sine branch is discarded)."""
    u1 = stream.uniform()
    while u1 == 0.0:
        u1 = stream.uniform()
    u2 = stream.uniform()
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


def standard_gamma(stream, shape):
    """Marsaglia-Tsang squeeze sampler; shapes below 1 use the boost step."""
    if shape < 1.0:
        g = standard_gamma(stream, shape + 1.0)
        u = stream.uniform()
        return g * u ** (1.0 / shape)
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = standard_normal(stream)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = stream.uniform()
        if u < 1.0 - 0.0331 * x * x * x * x:
            return d * v
        if u == 0.0:
            continue
        if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            return d * v


def exponential(stream, rate):
    return -math.log(1.0 - stream.uniform()) / rate


def uniform_interval(stream, lo, hi):
    return lo + (hi - lo) * stream.uniform()


def beta_variate(stream, alpha, beta):
    x = standard_gamma(stream, alpha)
    y = standard_gamma(stream, beta)
    total = x + y
    if total == 0.0:
        return 0.5
    return x / total
