"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when importable; otherwise, or
when the environment variable ``RADAR_SG_PURE_PYTHON`` is set to a non-empty
value other than ``0``, the pure-Python ``_pykernels`` module is used. Both
expose the same functions. ``BACKEND`` names the active one.
"""
import os

from . import _pykernels

if os.environ.get("RADAR_SG_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

NO_FADING = _pykernels.NO_FADING
GAMMA = _pykernels.GAMMA
POISSON_GAMMA = _pykernels.POISSON_GAMMA
NEGBIN_GAMMA = _pykernels.NEGBIN_GAMMA

hyp2f1_c1a = _impl.hyp2f1_c1a
mixture_hyp_sum = _impl.mixture_hyp_sum
simulate_batch = _impl.simulate_batch
