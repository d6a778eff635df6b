"""Kernel backend selection.

The compiled Cython kernels are used when importable; otherwise the numpy
fallback. ``use_backend`` switches explicitly (tests and the benchmark use it).
"""
import numpy as np

from cvteleport import _fallback

try:
    from cvteleport import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

_active = _compiled if _compiled is not None else _fallback


def available_backends():
    return sorted(_BACKENDS)


def active_backend():
    return "cython" if _active is _compiled and _compiled is not None else "python"


def use_backend(name):
    """Select the kernel backend by name ("cython" or "python")."""
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}") from None


def displacement_matrix(alpha, N):
    return _active.displacement_matrix(complex(alpha), int(N))


def displace_batch(alphas, vecs):
    alphas = np.ascontiguousarray(alphas, dtype=np.complex128).reshape(-1)
    vecs = np.ascontiguousarray(vecs, dtype=np.complex128)
    return _active.displace_batch(alphas, vecs)
