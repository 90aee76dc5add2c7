"""Numerical hot loops.

The compiled extension ``_ext`` is used when it has been built; otherwise the
numpy implementations in ``_fallback`` are used.  Set ``PSDMIX_PURE=1`` to
force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
if not os.environ.get("PSDMIX_PURE"):
    try:
        from . import _ext as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
else:
    _impl = _fallback

invert_psd = _impl.invert_psd
# NNLS only runs on cold starts, so it is not compiled
nnls = _fallback.nnls
lin_grad = _impl.lin_grad
golden_max_lin = _impl.golden_max_lin
