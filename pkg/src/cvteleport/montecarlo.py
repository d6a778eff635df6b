"""Sampling measurement outcomes and checking channel completeness on a grid."""
from dataclasses import dataclass

import numpy as np

from cvteleport.fock import annihilation_expectation, coherent_state, fidelity_pure
from cvteleport.quadrature import default_grid
from cvteleport.teleport import _grid_chunks, conditional_outputs, outcome_densities

# minimum fraction of P(beta) the sampling grid must capture
MIN_GRID_MASS = 0.99
# an input counts as coherent when its fidelity with |<a>> exceeds this
_COHERENT_FIDELITY = 1.0 - 1e-12


class GridMassError(ValueError):
    """The sampling grid misses too much of the outcome distribution."""


@dataclass(frozen=True)
class SampleSet:
    seed: int
    betas: np.ndarray
    method: str


def make_rng(seed):
    """Philox counter-based generator; bit-exact across platforms for a given seed."""
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def coherent_amplitude(psi):
    """Amplitude alpha if psi is (numerically) the coherent state |alpha>, else None."""
    alpha = annihilation_expectation(psi)
    if fidelity_pure(coherent_state(alpha, psi.shape[0]), psi) > _COHERENT_FIDELITY:
        return alpha
    return None


def sample_beta(p, psi, n, seed, grid=None):
    """Draw ``n`` measurement outcomes from P(beta).

    Coherent inputs |alpha> have a Gaussian P(beta) centred on alpha with
    per-axis variance 1/(2(1-q^2)) and are sampled exactly. Any other input is
    sampled by inverse CDF over grid cells followed by a uniform position within
    the chosen cell.
    """
    if n < 1:
        raise ValueError("sample count must be at least 1")
    psi = np.asarray(psi, dtype=np.complex128)
    rng = make_rng(seed)
    alpha = coherent_amplitude(psi)
    if alpha is not None:
        sd = np.sqrt(0.5 / (1.0 - p.q**2))
        xy = rng.normal(size=(n, 2)) * sd
        return SampleSet(seed, alpha + xy[:, 0] + 1j * xy[:, 1], "gaussian")

    grid = default_grid() if grid is None else grid
    mass = grid.weights * outcome_densities(p, psi, grid)
    total = float(mass.sum())
    if total < MIN_GRID_MASS:
        raise GridMassError(
            f"grid of radius {grid.radius} holds only {total:.4f} of P(beta); increase the radius"
        )
    cdf = np.cumsum(mass) / total
    cells = np.minimum(np.searchsorted(cdf, rng.random(n), side="right"), grid.size - 1)
    jitter = (rng.random((n, 2)) - 0.5) * grid.spacing
    betas = grid.betas[cells] + jitter[:, 0] + 1j * jitter[:, 1]
    return SampleSet(seed, betas, "grid")


def completeness_check(p, grid, block):
    """Operator-norm distance of the grid integral of T^dag T from the identity.

    Only the leading ``block`` x ``block`` corner is compared. T^dag T does not
    depend on the gain (D(g beta) is unitary), so the integrand is built from the
    conditional stage alone, which keeps every retained matrix element exact.
    """
    if not 1 <= block <= p.N // 2:
        raise ValueError(f"block {block} must lie in 1..N/2={p.N // 2}")
    basis = np.eye(p.N, block, dtype=np.complex128)
    acc = np.zeros((block, block), dtype=np.complex128)
    for sl in _grid_chunks(grid, p.N * block):
        cond = conditional_outputs(p.q, grid.betas[sl], basis)
        rows = (cond * np.sqrt(grid.weights[sl])[:, None, None]).reshape(-1, block)
        acc += rows.conj().T @ rows
    return float(np.linalg.norm(acc - np.eye(block), ord=2))
