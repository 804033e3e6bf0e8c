"""Backend selection for the hot kernels.

The compiled extension ``finsim._kernels`` is used when it imports; otherwise
the numpy fallback in ``finsim._kernels_py``. Setting ``FINSIM_PURE_PYTHON=1``
forces the fallback.
"""
import os

from . import _kernels_py

SERIES_EPS = _kernels_py.SERIES_EPS

_compiled = None
if os.environ.get("FINSIM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py

shape_terms = _impl.shape_terms
tail_integrals = _impl.tail_integrals


def swim_rk4(state0, force, moment, dt, mass, inertia, c_surge, c_yaw):
    """Backend ``swim_rk4`` after checking the half-step forcing layout (``2n+1`` samples)."""
    n_f, n_m = len(force), len(moment)
    if n_f != n_m or n_f % 2 == 0:
        raise ValueError("force and moment need the same odd length 2n+1 (half-step samples)")
    if len(state0) != 5:
        raise ValueError("state0 must be (x, y, psi, u, r)")
    return _impl.swim_rk4(state0, force, moment, dt, mass, inertia, c_surge, c_yaw)


def backends():
    """Available kernel modules keyed by name (used by tests and the benchmark)."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out
