"""Feedback-compensated beam splitter: the measurement picture of teleportation.

The signal passes a beam splitter of reflectivity 1 - q^2; the reflected beam
is measured by eight-port homodyne detection (a projection on scaled coherent
states) and the transmitted beam is displaced by f * beta.

Two-mode states are N x N arrays indexed [transmitted, reflected]; two-mode
operators act on their row-major flattening (index = a * N + b).
"""
import math
import threading
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from cvteleport.fock import coherent_state, displace, displacement_operator
from cvteleport.teleport import TeleportParams, _check_beta, _check_input, _check_q, apply_transfer

_build_lock = threading.Lock()


def _sector(total, N):
    """Basis states (a, total - a) of one total-photon-number sector inside the truncation."""
    lo = max(0, total - (N - 1))
    hi = min(total, N - 1)
    return np.arange(lo, hi + 1)


@lru_cache(maxsize=8)
def _unitary(q, N):
    theta = math.acos(q)
    U = np.zeros((N * N, N * N))
    for total in range(2 * N - 1):
        a = _sector(total, N)
        b = total - a
        # generator theta (a b^dag - a^dag b); with this sign a^dag -> q a^dag + sqrt(1-q^2) b^dag
        G = np.zeros((a.size, a.size))
        for i in range(a.size - 1):
            # a^dag b couples (a, b) -> (a + 1, b - 1)
            amp = math.sqrt((a[i] + 1) * b[i])
            G[i + 1, i] = -theta * amp
            G[i, i + 1] = theta * amp
        idx = a * N + b
        U[np.ix_(idx, idx)] = expm(G)
    U.setflags(write=False)
    return U


def beamsplitter_unitary(q, N):
    """Two-mode beam-splitter unitary with transmission amplitude q (N^2 x N^2, real).

    |alpha>|0> maps to |q alpha>|sqrt(1-q^2) alpha>. Each total-photon sector is
    exponentiated separately; sectors with total < N are complete and therefore
    exact, higher ones are clipped by the truncation. Built once per (q, N).
    """
    _check_q(q)
    with _build_lock:
        return _unitary(float(q), int(N))


def povm_projection_state(beta, q, N):
    """Unnormalized POVM vector sqrt((1-q^2)/pi) |sqrt(1-q^2) beta> for outcome beta."""
    _check_q(q)
    s = 1.0 - q * q
    return math.sqrt(s / math.pi) * coherent_state(math.sqrt(s) * _check_beta(beta), N)


def transmitted_state(q, beta, psi):
    """Transmitted-mode state after the beam splitter, conditioned on outcome beta."""
    N = np.asarray(psi).shape[0]
    psi = _check_input(psi, N)
    two_mode = np.zeros((N, N), dtype=np.complex128)
    two_mode[:, 0] = psi
    evolved = (beamsplitter_unitary(q, N) @ two_mode.ravel()).reshape(N, N)
    return evolved @ povm_projection_state(beta, q, N).conj()


def compensated_output(q, f, beta, psi):
    """Transmitted state displaced by the feedback amplitude f * beta."""
    return displace(transmitted_state(q, beta, psi), f * _check_beta(beta))


def equivalence_residual(q, g, beta, psi):
    """Norm of the difference between the compensated beam splitter at f = g - q and T_g(beta) psi.

    Amplitudes and phases are compared directly; no renormalization.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    p = TeleportParams(q, g, psi.shape[0])
    diff = compensated_output(q, g - q, beta, psi) - apply_transfer(p, beta, psi)
    return float(np.linalg.norm(diff))


def compensated_operator(q, f, beta, N, block=None):
    """Matrix of psi -> compensated_output(q, f, beta, psi) on the first ``block`` columns."""
    block = N if block is None else block
    U = beamsplitter_unitary(q, N)
    # columns (a, 0) of U carry the signal with vacuum in the auxiliary port
    cols = U[:, np.arange(block) * N].reshape(N, N, block)
    trans = np.einsum("abk,b->ak", cols, povm_projection_state(beta, q, N).conj())
    return displacement_operator(f * _check_beta(beta), N) @ trans


def hermiticity_deviation(q, beta, N, block=10):
    """Max entry of M - M^dag on the leading block for the unit-gain (f = 1 - q) operator."""
    M = compensated_operator(q, 1.0 - q, beta, N, block=N)[:block, :block]
    return float(np.abs(M - M.conj().T).max())
