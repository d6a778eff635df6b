"""Continuous-variable teleportation channel in the truncated Fock basis.

The measurement outcome ``beta`` uses the amplitude convention: D(beta) shifts a
coherent amplitude by exactly beta. For a resource with entanglement
coefficient q and feedback gain g the conditional output is

    T_g(beta) = sqrt((1 - q^2)/pi) * D(g beta) q^n D(-beta)

applied to the input, unnormalized so that its squared norm is the outcome
density P(beta) with respect to d^2 beta.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np

from cvteleport import _backend
from cvteleport.fock import (
    DEFAULT_TRUNCATION,
    displacement_operator,
    norm_sq,
)
from cvteleport.quadrature import GridTruncationWarning

# boundary-ring probability mass above which a grid is considered too small
BOUNDARY_MASS_TOL = 1e-6
# complex entries processed per batch when integrating over a grid
_CHUNK_ENTRIES = 1 << 21


def _check_q(q):
    if not (0.0 <= q < 1.0):
        raise ValueError(f"entanglement coefficient q={q} outside [0, 1)")


@dataclass(frozen=True)
class TeleportParams:
    q: float
    g: float
    N: int = DEFAULT_TRUNCATION

    def __post_init__(self):
        _check_q(self.q)
        if not (self.g >= 0.0 and math.isfinite(self.g)):
            raise ValueError(f"gain g={self.g} must be finite and non-negative")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"truncation N={self.N} must be a positive integer")

    @property
    def prefactor(self):
        return math.sqrt((1.0 - self.q**2) / math.pi)


def _check_beta(beta):
    beta = complex(beta)
    if not (math.isfinite(beta.real) and math.isfinite(beta.imag)):
        raise ValueError(f"measurement outcome {beta} is not finite")
    return beta


def _check_input(psi, N):
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape[0] != N:
        raise ValueError(f"input truncation {psi.shape[0]} does not match N={N}")
    return psi


def epr_state(q, N):
    """Two-mode resource sqrt(1-q^2) sum_n q^n |n;n> as an N x N amplitude array."""
    _check_q(q)
    n = np.arange(N)
    return np.diag(math.sqrt(1.0 - q * q) * q**n).astype(np.complex128)


def bell_eigenstate(beta, N):
    """Joint eigenstate pi^(-1/2) sum_n D_A(beta)|n;n> over modes (A, R).

    Entry [a, r] is the amplitude of |a; r>; since the sum pairs equal photon
    numbers, this is just D(beta)[a, r] / sqrt(pi).
    """
    return displacement_operator(_check_beta(beta), N) / math.sqrt(math.pi)


def transfer_operator(p, beta):
    """Dense matrix of T_g(beta)."""
    beta = _check_beta(beta)
    scale = p.prefactor * p.q ** np.arange(p.N)
    return displacement_operator(p.g * beta, p.N) @ (scale[:, None] * displacement_operator(-beta, p.N))


def conditional_outputs(q, betas, psi):
    """Conditional mode-B states sqrt((1-q^2)/pi) q^n D(-beta) psi, before feedback.

    ``psi`` is an (N,) vector or an (N, K) stack of columns; the result has a
    leading axis over ``betas``.
    """
    _check_q(q)
    betas = np.asarray(betas, dtype=np.complex128).reshape(-1)
    psi = np.asarray(psi, dtype=np.complex128)
    single = psi.ndim == 1
    cols = psi.reshape(psi.shape[0], -1)
    N = cols.shape[0]
    stacked = np.broadcast_to(cols, (betas.size,) + cols.shape)
    out = _backend.displace_batch(-betas, stacked)
    out *= (math.sqrt((1.0 - q * q) / math.pi) * q ** np.arange(N))[None, :, None]
    return out[:, :, 0] if single else out


def feedback(g, betas, conditional):
    """Apply the gain displacement D(g beta) to each conditional state."""
    betas = np.asarray(betas, dtype=np.complex128).reshape(-1)
    conditional = np.asarray(conditional, dtype=np.complex128)
    if g == 0.0:
        return conditional.copy()
    single = conditional.ndim == 2
    blocks = conditional[:, :, None] if single else conditional
    out = _backend.displace_batch(g * betas, blocks)
    return out[:, :, 0] if single else out


def teleported_outputs(p, betas, psi):
    """T_g(beta) psi for every beta; shape (len(betas), N)."""
    psi = _check_input(psi, p.N)
    return feedback(p.g, betas, conditional_outputs(p.q, betas, psi))


def apply_transfer(p, beta, psi):
    """T_g(beta) psi as displace, scale by q^n, displace (no N x N matrix product)."""
    return teleported_outputs(p, [_check_beta(beta)], psi)[0]


def p_density(p, beta, psi):
    """Outcome density P(beta) = <psi|T^dag T|psi>; the gain stage is unitary and skipped."""
    psi = _check_input(psi, p.N)
    return norm_sq(conditional_outputs(p.q, [_check_beta(beta)], psi)[0])


def coherent_closed_form(p, beta, alpha):
    """(coefficient, amplitude) with T_g(beta)|alpha> = coefficient * |amplitude>."""
    beta, alpha = _check_beta(beta), complex(alpha)
    s = 1.0 - p.q**2
    cross = alpha * beta.conjugate() - beta * alpha.conjugate()
    coef = p.prefactor * np.exp(-s * abs(alpha - beta) ** 2 / 2.0) * np.exp((1.0 - p.g * p.q) * cross / 2.0)
    return complex(coef), p.q * alpha + (p.g - p.q) * beta


def one_photon_closed_form(p, beta):
    """T_g(beta)|1> from its two-component closed form."""
    beta = _check_beta(beta)
    s = 1.0 - p.q**2
    v = np.zeros(p.N, dtype=np.complex128)
    v[0] = s * beta.conjugate()
    if p.N > 1:
        v[1] = p.q
    v = v * p.prefactor * math.exp(-s * abs(beta) ** 2 / 2.0)
    return _backend.displace_batch([(p.g - p.q) * beta], v.reshape(1, -1, 1))[0, :, 0]


def conditional_state_bruteforce(q, beta, psi, N):
    """Mode-B state from the explicit three-mode contraction <beta(A,R)| (psi_A x q(R,B)).

    O(N^3) memory and time; an oracle for the factored routes, not for production use.
    """
    psi = _check_input(psi, N)
    three = np.einsum("a,rb->arb", psi, epr_state(q, N))
    return np.einsum("ar,arb->b", bell_eigenstate(beta, N).conj(), three)


def _grid_chunks(grid, width):
    step = max(1, _CHUNK_ENTRIES // max(1, width))
    for start in range(0, grid.size, step):
        yield slice(start, min(start + step, grid.size))


def _warn_boundary(grid, densities):
    mass = float(np.dot(grid.weights[grid.boundary_mask()], densities[grid.boundary_mask()]))
    if mass > BOUNDARY_MASS_TOL:
        warnings.warn(
            f"outcome density carries mass {mass:.2e} on the boundary of a radius-{grid.radius} grid",
            GridTruncationWarning,
            stacklevel=3,
        )


def outcome_densities(p, psi, grid):
    """P(beta) at every grid node."""
    psi = _check_input(psi, p.N)
    dens = np.empty(grid.size)
    for sl in _grid_chunks(grid, p.N):
        cond = conditional_outputs(p.q, grid.betas[sl], psi)
        dens[sl] = np.einsum("mn,mn->m", cond.conj(), cond).real
    return dens


def average_fidelity(p, psi, grid):
    """Outcome-averaged fidelity: integral of |<psi|T_g(beta)|psi>|^2 over the plane."""
    psi = _check_input(psi, p.N)
    total = 0.0
    dens = np.empty(grid.size)
    for sl in _grid_chunks(grid, p.N):
        cond = conditional_outputs(p.q, grid.betas[sl], psi)
        dens[sl] = np.einsum("mn,mn->m", cond.conj(), cond).real
        out = feedback(p.g, grid.betas[sl], cond)
        total += float(np.dot(grid.weights[sl], np.abs(out @ psi.conj()) ** 2))
    _warn_boundary(grid, dens)
    return total


def average_output_density(p, psi, grid):
    """Outcome-averaged output density matrix, integral of T psi (T psi)^dag."""
    psi = _check_input(psi, p.N)
    rho = np.zeros((p.N, p.N), dtype=np.complex128)
    dens = np.empty(grid.size)
    for sl in _grid_chunks(grid, p.N):
        cond = conditional_outputs(p.q, grid.betas[sl], psi)
        dens[sl] = np.einsum("mn,mn->m", cond.conj(), cond).real
        out = feedback(p.g, grid.betas[sl], cond)
        rho += (out * grid.weights[sl, None]).T @ out.conj()
    _warn_boundary(grid, dens)
    return rho


def density_mean_photon_number(rho):
    """tr(n rho) / tr(rho)."""
    diag = np.real(np.diagonal(rho))
    return float(np.dot(np.arange(diag.size), diag) / diag.sum())


def gain_scan(q, gains, psi, grid):
    """Average fidelity and output mean photon number for several gains at once.

    The conditional stage is shared between gains; only the feedback
    displacement is recomputed. Returns two arrays aligned with ``gains``.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    gains = [float(g) for g in gains]
    for g in gains:
        TeleportParams(q, g, psi.shape[0])
    n = np.arange(psi.shape[0])
    fid = np.zeros(len(gains))
    trace = np.zeros(len(gains))
    photons = np.zeros(len(gains))
    dens = np.empty(grid.size)
    for sl in _grid_chunks(grid, psi.shape[0]):
        cond = conditional_outputs(q, grid.betas[sl], psi)
        dens[sl] = np.einsum("mn,mn->m", cond.conj(), cond).real
        w = grid.weights[sl]
        for i, g in enumerate(gains):
            out = feedback(g, grid.betas[sl], cond)
            fid[i] += float(np.dot(w, np.abs(out @ psi.conj()) ** 2))
            pops = w @ (np.abs(out) ** 2)
            trace[i] += pops.sum()
            photons[i] += float(np.dot(pops, n))
    _warn_boundary(grid, dens)
    return fid, photons / trace
