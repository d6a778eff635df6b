import math

import numpy as np
import pytest
from scipy.stats import chisquare

from cvteleport.fock import coherent_state, fock_state
from cvteleport.montecarlo import GridMassError, coherent_amplitude, completeness_check, sample_beta
from cvteleport.quadrature import QuadratureGrid, default_grid, integrate_plane
from cvteleport.teleport import TeleportParams, outcome_densities, p_density


def gaussian(beta):
    return math.exp(-abs(beta) ** 2) / math.pi


class TestGrid:
    def test_weights_sum_to_area(self):
        for radius, points in [(8.0, 160), (2.0, 7), (12.0, 33)]:
            grid = QuadratureGrid(radius, points)
            assert abs(grid.weights.sum() - (2 * radius) ** 2) < 1e-12 * (2 * radius) ** 2

    def test_deterministic_nodes(self):
        a, b = QuadratureGrid(3.0, 11), QuadratureGrid(3.0, 11)
        assert np.array_equal(a.betas, b.betas)
        assert a == b

    def test_defaults(self):
        grid = default_grid()
        assert (grid.radius, grid.points, grid.size) == (8.0, 160, 25600)
        assert grid.spacing == pytest.approx(0.1)

    def test_cell_lookup(self):
        grid = QuadratureGrid(2.0, 4)
        assert np.array_equal(grid.cell_of(grid.betas), np.arange(16))
        assert grid.cell_of(np.array([5.0 + 0j]))[0] == -1

    @pytest.mark.parametrize("kwargs", [dict(radius=0.0), dict(radius=1.0, points=0), dict(radius=1.0, points=2.5)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            QuadratureGrid(**kwargs)


class TestIntegrate:
    def test_gaussian(self):
        assert abs(integrate_plane(gaussian, default_grid()) - 1) < 1e-6

    def test_constant(self):
        assert abs(integrate_plane(lambda b: 1.0, QuadratureGrid(2.0, 20)) - 16) < 1e-12

    def test_vectorized_matches_loop(self):
        grid = QuadratureGrid(4.0, 40)
        loop = integrate_plane(gaussian, grid)
        vec = integrate_plane(lambda b: np.exp(-np.abs(b) ** 2) / np.pi, grid, vectorized=True)
        assert vec == pytest.approx(loop, rel=1e-13)

    def test_matrix_valued(self):
        grid = QuadratureGrid(6.0, 60)
        out = integrate_plane(lambda b: gaussian(b) * np.array([[1.0, b.real], [b.imag, abs(b) ** 2]]), grid)
        assert out.shape == (2, 2)
        assert np.abs(out - np.array([[1, 0], [0, 1]])).max() < 1e-6

    def test_linear(self):
        grid = QuadratureGrid(3.0, 30)
        f = lambda b: math.cos(b.real) * b.imag**2
        h = lambda b: math.exp(-abs(b))
        combo = integrate_plane(lambda b: 2.5 * f(b) - 0.7 * h(b), grid)
        assert abs(combo - (2.5 * integrate_plane(f, grid) - 0.7 * integrate_plane(h, grid))) < 1e-12

    def test_outcome_density(self):
        p = TeleportParams(0.5, 1.0, 60)
        psi = coherent_state(1.0, 60)
        assert abs(integrate_plane(lambda b: p_density(p, b, psi), QuadratureGrid(8.0, 80)) - 1) < 2e-3

    def test_refinement_stable(self):
        p = TeleportParams(0.5, 1.0, 40)
        psi = fock_state(2, 40)
        coarse = np.dot(QuadratureGrid(8.0, 80).weights, outcome_densities(p, psi, QuadratureGrid(8.0, 80)))
        fine = np.dot(QuadratureGrid(8.0, 160).weights, outcome_densities(p, psi, QuadratureGrid(8.0, 160)))
        assert abs(coarse - fine) < 2e-3

    def test_non_finite(self):
        with pytest.raises(FloatingPointError):
            integrate_plane(lambda b: math.inf if b.real > 0 else 0.0, QuadratureGrid(1.0, 4))


class TestCompleteness:
    def test_unit_gain(self):
        assert completeness_check(TeleportParams(0.5, 1.0, 60), default_grid(), 10) < 2e-3

    def test_strong_entanglement_wide_grid(self):
        assert completeness_check(TeleportParams(0.9, 1.0, 60), QuadratureGrid(12.0, 160), 10) < 5e-3

    def test_unentangled_reduces_to_coherent_povm(self):
        grid = QuadratureGrid(8.0, 100)
        assert completeness_check(TeleportParams(0.0, 0.0, 30), grid, 10) < 2e-3

    def test_block_range(self):
        with pytest.raises(ValueError):
            completeness_check(TeleportParams(0.5, 1.0, 10), default_grid(), 6)


class TestSampling:
    def test_coherent_moments(self):
        q, alpha, n = 0.5, 2.0, 100_000
        s = sample_beta(TeleportParams(q, 1.0, 60), coherent_state(alpha, 60), n, seed=11)
        assert s.method == "gaussian"
        var = 1 / (2 * (1 - q * q))
        for axis, mean in ((s.betas.real, alpha), (s.betas.imag, 0.0)):
            assert abs(axis.mean() - mean) < 3 * math.sqrt(var / n)
            # standard error of a sample variance from a normal population
            assert abs(axis.var(ddof=1) - var) < 3 * var * math.sqrt(2 / (n - 1))

    def test_near_maximal_entanglement_narrows(self):
        q, n = 0.99, 100_000
        s = sample_beta(TeleportParams(q, 1.0, 60), coherent_state(0.5j, 60), n, seed=3)
        var = 1 / (2 * (1 - q * q))
        assert abs(s.betas.imag.var(ddof=1) - var) < 3 * var * math.sqrt(2 / (n - 1))

    def test_reproducible(self):
        p = TeleportParams(0.5, 1.0, 30)
        for psi in (coherent_state(1.0, 30), fock_state(1, 30)):
            a = sample_beta(p, psi, 500, seed=2**63 + 5, grid=QuadratureGrid(8.0, 60))
            b = sample_beta(p, psi, 500, seed=2**63 + 5, grid=QuadratureGrid(8.0, 60))
            assert a.betas.tobytes() == b.betas.tobytes()
        c = sample_beta(p, fock_state(1, 30), 500, seed=6, grid=QuadratureGrid(8.0, 60))
        assert c.betas.tobytes() != a.betas.tobytes()

    def test_coherent_detection(self):
        assert coherent_amplitude(coherent_state(0.3 - 1j, 40)) == pytest.approx(0.3 - 1j)
        assert coherent_amplitude(fock_state(1, 40)) is None
        assert coherent_amplitude(fock_state(0, 40)) == 0

    def _binned_chi2(self, samples, grid, probs, factor):
        """Aggregate grid cells into factor x factor bins and compare counts."""
        P = grid.points // factor
        idx = grid.cell_of(samples)
        assert np.all(idx >= 0)
        iy, ix = np.divmod(idx, grid.points)
        counts = np.bincount((iy // factor) * P + ix // factor, minlength=P * P)
        expected = probs.reshape(P, factor, P, factor).sum(axis=(1, 3)).ravel()
        expected = expected / expected.sum() * counts.sum()
        keep = expected >= 5
        obs = np.r_[counts[keep], counts[~keep].sum()]
        exp = np.r_[expected[keep], expected[~keep].sum()]
        return chisquare(obs, exp).pvalue

    def test_gaussian_sampler_matches_grid_density(self):
        p = TeleportParams(0.5, 1.0, 40)
        psi = coherent_state(1.0 + 0.5j, 40)
        fine = QuadratureGrid(8.0, 320)
        probs = fine.weights * outcome_densities(p, psi, fine)
        s = sample_beta(p, psi, 100_000, seed=99)
        assert self._binned_chi2(s.betas, fine, probs, 8) > 1e-3

    def test_grid_sampler_matches_grid_density(self):
        p = TeleportParams(0.6, 1.0, 40)
        psi = fock_state(1, 40)
        grid = QuadratureGrid(8.0, 160)
        probs = grid.weights * outcome_densities(p, psi, grid)
        s = sample_beta(p, psi, 100_000, seed=4, grid=grid)
        assert s.method == "grid"
        assert self._binned_chi2(s.betas, grid, probs, 4) > 1e-3

    def test_grid_mass_deficit(self):
        with pytest.raises(GridMassError):
            sample_beta(TeleportParams(0.5, 1.0, 30), fock_state(2, 30), 10, seed=1, grid=QuadratureGrid(1.0, 20))

    def test_count(self):
        with pytest.raises(ValueError):
            sample_beta(TeleportParams(0.5, 1.0, 10), fock_state(0, 10), 0, seed=1)
