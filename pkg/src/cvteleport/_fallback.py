"""Pure numpy implementation of the displacement kernels.

Same recurrence and same call signatures as the compiled ``_kernels`` module;
used when the extension is not built.
"""
import numpy as np
from scipy.special import gammaln


def displacement_matrix(alpha, N):
    """Dense N x N matrix of D(alpha) in the truncated Fock basis."""
    alpha = complex(alpha)
    N = int(N)
    x = abs(alpha) ** 2
    if x == 0.0:
        return np.eye(N, dtype=np.complex128)

    k = np.arange(N)
    sq = np.sqrt(np.arange(2 * N + 2, dtype=np.float64))
    # F[n, k] = sqrt(n!/(n+k)!) x^(k/2) e^(-x/2) L_n^(k)(x)
    F = np.zeros((N, N))
    f = np.exp(-0.5 * x + 0.5 * k * np.log(x) - 0.5 * gammaln(k + 1.0))
    fprev = np.zeros(N)
    for n in range(N):
        F[n] = f
        fnext = ((2.0 * n + 1.0 + k - x) * f - sq[n] * sq[n + k] * fprev) / (sq[n + 1] * sq[n + 1 + k])
        fprev, f = f, fnext

    u = alpha / abs(alpha)
    n_idx, k_idx = np.nonzero(np.add.outer(k, k) < N)
    D = np.zeros((N, N), dtype=np.complex128)
    D[n_idx + k_idx, n_idx] = u ** k_idx * F[n_idx, k_idx]
    upper = k_idx > 0
    n_up, k_up = n_idx[upper], k_idx[upper]
    D[n_up, n_up + k_up] = (-np.conj(u)) ** k_up * F[n_up, k_up]
    return D


def displace_batch(alphas, vecs):
    """Apply D(alphas[i]) to vecs[i] for every i; vecs has shape (M, N, K)."""
    alphas = np.asarray(alphas, dtype=np.complex128)
    vecs = np.asarray(vecs, dtype=np.complex128)
    M, N, _ = vecs.shape
    if alphas.shape[0] != M:
        raise ValueError("need one displacement per vector block")
    out = np.empty_like(vecs)
    for i in range(M):
        out[i] = displacement_matrix(alphas[i], N) @ vecs[i]
    return out
