"""Kernel selection: compiled extension if built, pure Python otherwise.

Set QNASH_PURE_PYTHON=1 to force the fallback (used by the benchmark and
by the cross-implementation tests).  Both implementations are exact
mirrors, so the choice never changes results, only speed.
"""

import os

if os.environ.get("QNASH_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        from . import _kernels_py as _impl

COMPILED = _impl.COMPILED
STATUS_OK = _impl.STATUS_OK
STATUS_TRUNCATED = _impl.STATUS_TRUNCATED
STATUS_HARD_LIMIT = _impl.STATUS_HARD_LIMIT

sample_many = _impl.sample_many
simulate_parallel = _impl.simulate_parallel
simulate_sensing = _impl.simulate_sensing
simulate_observable = _impl.simulate_observable

implementation = "compiled" if COMPILED else "python"
