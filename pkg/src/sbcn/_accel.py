"""Select the compiled kernels when available, else the numpy fallback."""
import logging
import os

logger = logging.getLogger(__name__)

if os.environ.get("SBCN_PURE_PYTHON", "") not in ("", "0"):
    from sbcn import _pykernels as kernels
    BACKEND = "python"
else:
    try:
        from sbcn import _kernels as kernels
        BACKEND = "cython"
    except ImportError:  # extension not built
        logger.debug("compiled kernels unavailable, using pure-Python fallback")
        from sbcn import _pykernels as kernels
        BACKEND = "python"

contingency = kernels.contingency
local_score = kernels.local_score
transitive_closure = kernels.transitive_closure

SCORE_LOGLIK = kernels.SCORE_LOGLIK
SCORE_AIC = kernels.SCORE_AIC
SCORE_BIC = kernels.SCORE_BIC
SCORE_BDE = kernels.SCORE_BDE
SCORE_K2 = kernels.SCORE_K2
