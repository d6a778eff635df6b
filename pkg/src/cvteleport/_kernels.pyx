# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled displacement kernels.

Matrix elements of D(alpha) are generated one diagonal at a time from the
normalized associated-Laguerre recurrence and consumed immediately, so a
displacement is applied in O(N^2) without storing the N x N matrix.
"""
import numpy as np
cimport numpy as cnp

from libc.math cimport exp, log, lgamma, sqrt, hypot

cnp.import_array()


cdef void _displace(double complex alpha, Py_ssize_t N, Py_ssize_t K,
                    const double complex* vin, double complex* vout,
                    const double* sq) noexcept nogil:
    # vin/vout are row-major N x K blocks; vout must be zeroed.
    cdef double r = hypot(alpha.real, alpha.imag)
    cdef double x = r * r
    cdef double logx = 0.0
    cdef double complex u = 1.0
    cdef double complex w
    cdef double complex up = 1.0
    cdef double complex um = 1.0
    cdef double complex cl, cu
    cdef double f, fprev, fnext
    cdef Py_ssize_t k, n, j, lo, hi

    if x == 0.0:
        for n in range(N * K):
            vout[n] = vin[n]
        return
    logx = log(x)
    u = alpha / r
    w = -u.conjugate()

    for k in range(N):
        if k > 0:
            up = up * u
            um = um * w
        f = exp(-0.5 * x + 0.5 * k * logx - 0.5 * lgamma(k + 1.0))
        fprev = 0.0
        for n in range(N - k):
            cl = up * f
            lo = (n + k) * K
            hi = n * K
            for j in range(K):
                vout[lo + j] = vout[lo + j] + cl * vin[hi + j]
            if k > 0:
                cu = um * f
                for j in range(K):
                    vout[hi + j] = vout[hi + j] + cu * vin[lo + j]
            fnext = ((2.0 * n + 1.0 + k - x) * f - sq[n] * sq[n + k] * fprev) / (sq[n + 1] * sq[n + 1 + k])
            fprev = f
            f = fnext


def displace_batch(const double complex[::1] alphas, const double complex[:, :, ::1] vecs):
    """Apply D(alphas[i]) to vecs[i] for every i; vecs has shape (M, N, K)."""
    cdef Py_ssize_t M = vecs.shape[0]
    cdef Py_ssize_t N = vecs.shape[1]
    cdef Py_ssize_t K = vecs.shape[2]
    cdef Py_ssize_t i
    if alphas.shape[0] != M:
        raise ValueError("need one displacement per vector block")
    out = np.zeros((M, N, K), dtype=np.complex128)
    if M == 0 or N == 0 or K == 0:
        return out
    cdef double complex[:, :, ::1] ov = out
    sq_arr = np.sqrt(np.arange(2 * N + 2, dtype=np.float64))
    cdef const double[::1] sq = sq_arr
    with nogil:
        for i in range(M):
            _displace(alphas[i], N, K, &vecs[i, 0, 0], &ov[i, 0, 0], &sq[0])
    return out


def displacement_matrix(double complex alpha, Py_ssize_t N):
    """Dense N x N matrix of D(alpha) in the truncated Fock basis."""
    eye = np.eye(N, dtype=np.complex128).reshape(1, N, N)
    return displace_batch(np.array([alpha], dtype=np.complex128), eye)[0]
