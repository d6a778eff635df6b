"""Single-mode truncated Fock space.

States are plain complex numpy vectors of length N (index = photon number),
operators are dense N x N complex arrays (row = output photon number). Conditional
states are generally unnormalized; functions that need a norm divide by it and
reject zero vectors.
"""
import numpy as np
from scipy.special import gammainc, gammaln

from cvteleport import _backend

DEFAULT_TRUNCATION = 60


class ZeroNormError(ValueError):
    """Raised when a norm-dependent quantity is requested for a zero vector."""


def _as_vector(v):
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d Fock vector, got shape {v.shape}")
    return v


def norm_sq(v):
    v = _as_vector(v)
    return float(np.vdot(v, v).real)


def _checked_norm_sq(v):
    n2 = norm_sq(v)
    if not n2 > 0.0:
        raise ZeroNormError("zero vector has no normalized direction")
    return n2


def normalize(v):
    v = _as_vector(v)
    return v / np.sqrt(_checked_norm_sq(v))


def fock_state(n, N):
    """Number state |n> in an N-dimensional truncation."""
    if not 0 <= n < N:
        raise ValueError(f"photon number {n} outside truncation 0..{N - 1}")
    v = np.zeros(N, dtype=np.complex128)
    v[n] = 1.0
    return v


def coherent_state(alpha, N):
    """Truncated coherent state |alpha>.

    Amplitudes are exp(-|alpha|^2/2) alpha^n / sqrt(n!), evaluated in log space.
    The vector is not renormalized: its squared-norm deficit is the Poisson tail
    beyond N-1.
    """
    if N < 1:
        raise ValueError("truncation must be at least 1")
    alpha = complex(alpha)
    r = abs(alpha)
    if r == 0.0:
        return fock_state(0, N)
    n = np.arange(N)
    logmag = -0.5 * r * r + n * np.log(r) - 0.5 * gammaln(n + 1.0)
    return np.exp(logmag) * np.exp(1j * np.angle(alpha) * n)


def poisson_tail(mean, N):
    """Probability that a Poisson(mean) variable is >= N."""
    if mean == 0.0:
        return 0.0
    # regularized lower incomplete gamma P(N, mean) equals P(X >= N)
    return float(gammainc(N, mean))


def truncation_for(alpha_max, tol=1e-12):
    """Smallest N whose Poisson tail beyond N-1 at mean |alpha_max|^2 is below tol."""
    mean = abs(alpha_max) ** 2
    N = 1
    while poisson_tail(mean, N) >= tol:
        N += 1
    return N


def displacement_operator(alpha, N):
    """Dense matrix of the displacement operator D(alpha).

    Elements come from the closed Laguerre form
    <m|D|n> = sqrt(n!/m!) alpha^(m-n) exp(-|alpha|^2/2) L_n^(m-n)(|alpha|^2)  (m >= n)
    and are exact to rounding for every retained index; the truncated matrix is
    therefore not exactly unitary near the cutoff.
    """
    if N < 1:
        raise ValueError("truncation must be at least 1")
    return _backend.displacement_matrix(alpha, N)


def displace(v, alpha):
    """D(alpha) v without forming the matrix."""
    v = _as_vector(v)
    return _backend.displace_batch([alpha], v.reshape(1, -1, 1))[0, :, 0]


def inner(u, v):
    """<u|v>."""
    u, v = _as_vector(u), _as_vector(v)
    if u.shape != v.shape:
        raise ValueError(f"truncation mismatch: {u.shape[0]} vs {v.shape[0]}")
    return complex(np.vdot(u, v))


def fidelity_pure(u, v):
    """|<u|v>|^2 / <v|v> for normalized u and possibly unnormalized v."""
    n2 = _checked_norm_sq(v)
    return abs(inner(u, v)) ** 2 / n2


def mean_photon_number(v):
    v = _as_vector(v)
    n2 = _checked_norm_sq(v)
    return float(np.dot(np.arange(v.shape[0]), np.abs(v) ** 2) / n2)


def annihilation_expectation(v):
    """<v|a|v> / <v|v>."""
    v = _as_vector(v)
    n2 = _checked_norm_sq(v)
    return complex(np.vdot(v[:-1], np.sqrt(np.arange(1, v.shape[0])) * v[1:]) / n2)
