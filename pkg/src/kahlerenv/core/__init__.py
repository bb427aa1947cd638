"""Batch kernels behind the grid scans and Monte Carlo estimators.

The compiled extension ``_ckernels`` is used when it has been built; the
numpy module ``_pykernels`` is the fallback. Set ``KAHLERENV_PURE_PYTHON=1``
to force the fallback.
"""
import os

from . import _pykernels

KERNEL_NAMES = ("kahan_sum", "psi_moduli", "reduction_points", "tian_integrand",
                "tian_sample", "tian_psi_weights")


def _select():
    if os.environ.get("KAHLERENV_PURE_PYTHON", "") not in ("", "0"):
        return _pykernels
    try:
        from . import _ckernels
    except ImportError:
        return _pykernels
    return _ckernels


backend = _select()
BACKEND = backend.BACKEND

kahan_sum = backend.kahan_sum
psi_moduli = backend.psi_moduli
reduction_points = backend.reduction_points
tian_integrand = backend.tian_integrand
tian_sample = backend.tian_sample
tian_psi_weights = backend.tian_psi_weights


def available_backends() -> dict:
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
