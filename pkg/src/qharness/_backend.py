"""Pick the compiled kernels if available, otherwise the numpy fallback.

Set ``QHARNESS_PURE_PYTHON=1`` to force the fallback (used by the
benchmark and by the backend-equivalence tests).
"""
import os

from . import _fallback

NAME = "python"

if os.environ.get("QHARNESS_PURE_PYTHON") != "1":
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _fallback
    else:
        NAME = "compiled"
else:
    _impl = _fallback

loggamma = _impl.loggamma
sum_log_abs_gamma_sq = _impl.sum_log_abs_gamma_sq
# numpy's vectorized exp/log beat the compiled loop for this one (see benchmarks/)
log_weight = _fallback.log_weight
