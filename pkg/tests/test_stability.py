"""Unit tests for the linearized-operator spectra and relaxation dynamics."""

import math

import numpy as np
import pytest

from clinewave.errors import ConvergenceError
from clinewave.stability import (
    adjoint_kernel_residual,
    assemble_L,
    assemble_M,
    kernel_mode_residual,
    perturbation_projection,
    relaxation_shift,
    second_kernel_growth_rate,
    second_kernel_solution,
    similarity_defect,
    solvability_ratio,
    spectrum,
)
from clinewave.speed import c1_exact
from clinewave.standing import profile_from_quadrature

S, R = 0.1, 0.1


@pytest.fixture(scope="module")
def u0():
    return profile_from_quadrature(S, R, x_max=60.0, dx=0.05)


@pytest.fixture(scope="module")
def op_L(u0):
    return assemble_L(u0, S, R)


@pytest.fixture(scope="module")
def op_M(u0):
    return assemble_M(u0, S, R)


class TestAssembly:
    def test_M_is_symmetric_by_construction(self, op_M):
        diff = op_M.matrix - op_M.matrix.T
        assert abs(diff).max() < 1e-12

    def test_boundary_row_diagonal_approaches_limit(self, op_M, u0):
        # c(x) -> -S in the tails, so edge diagonals approach -S - 2/dx^2.
        expected = -S - 2.0 / u0.dx**2
        assert op_M.diag[0] == pytest.approx(expected, rel=1e-6)
        assert op_M.diag[-1] == pytest.approx(expected, rel=1e-6)

    def test_similarity_with_the_weight(self, op_L, op_M):
        assert similarity_defect(op_L, op_M) < 1e-4

    def test_translation_mode_in_kernel(self, op_L, u0):
        # L applied to the discretized slope: O(dx^2) residual.
        assert kernel_mode_residual(op_L, u0) < 1e-3

    def test_coarse_grid_rejected(self):
        coarse = profile_from_quadrature(S, R, x_max=30.0, dx=0.5)
        with pytest.raises(ValueError):
            assemble_L(coarse, S, R)

    def test_transpose_swaps_bands(self, op_L):
        t = op_L.transpose()
        assert t.tag == "L_adjoint"
        diff = t.matrix - op_L.matrix.T
        assert abs(diff).max() == 0.0


class TestSpectrum:
    def test_leading_eigenpair_is_translation_mode(self, op_L, u0):
        vals, vecs = spectrum(op_L, k=6)
        assert abs(vals[0]) < 1e-3
        du = u0.du[1:-1]
        cosine = abs(np.dot(vecs[:, 0], du)) / (
            np.linalg.norm(vecs[:, 0]) * np.linalg.norm(du))
        assert cosine > 0.999

    def test_no_positive_eigenvalues(self, op_L):
        vals, _ = spectrum(op_L, k=8)
        assert np.all(vals <= 1e-3)

    def test_spectral_gap(self, op_L):
        vals, _ = spectrum(op_L, k=2)
        assert vals[1] < -0.01

    def test_L_and_M_spectra_agree(self, op_L, op_M):
        vals_L, _ = spectrum(op_L, k=6)
        vals_M, _ = spectrum(op_M, k=6)
        assert np.max(np.abs(vals_L - vals_M)) < 1e-6

    def test_two_discrete_modes_above_the_essential_cluster(self, op_M):
        # Structure of the truncated spectrum: the kernel mode near 0,
        # one isolated eigenvalue in (-S, 0), and a dense cluster just
        # below -S standing in for the essential spectrum.
        vals, _ = spectrum(op_M, k=40)
        above = vals[vals > -S + 5e-3]
        assert above.size == 2
        assert abs(above[0]) < 1e-3
        cluster = vals[vals <= -S + 5e-3]
        assert cluster.size == 38
        # dense: neighbor gaps in the cluster font are tiny compared to S
        assert np.max(np.abs(np.diff(cluster[:10]))) < 0.2 * S

    def test_M_eigenvector_maps_to_L_eigenvector_through_weight(self, op_L, op_M, u0):
        vals_M, vecs_M = spectrum(op_M, k=1)
        w = op_L.weight
        mapped = vecs_M[:, 0] / w
        mapped /= np.linalg.norm(mapped)
        residual = op_L.apply(mapped) - vals_M[0] * mapped
        assert np.max(np.abs(residual)) < 1e-4


class TestAdjointKernel:
    def test_residual_small_at_baseline(self, u0):
        assert adjoint_kernel_residual(u0, S, R) < 1e-3

    def test_residual_refines_at_second_order(self):
        # Quartering under each halving of dx; the wide domain keeps the
        # truncated-tail boundary contribution out of the measurement.
        res = {}
        for dx in (0.05, 0.025, 0.0125):
            prof = profile_from_quadrature(S, R, x_max=80.0, dx=dx)
            res[dx] = adjoint_kernel_residual(prof, S, R)
        assert res[0.05] / res[0.025] == pytest.approx(4.0, rel=0.2)
        assert res[0.025] / res[0.0125] == pytest.approx(4.0, rel=0.2)

    def test_unweighted_slope_is_not_in_the_adjoint_kernel(self):
        # Negative control: residual refuses to vanish under refinement.
        res = {}
        for dx in (0.05, 0.025):
            prof = profile_from_quadrature(S, R, x_max=80.0, dx=dx)
            res[dx] = adjoint_kernel_residual(prof, S, R, weighted=False)
        assert res[0.05] > 1e-2
        assert res[0.025] > 1e-2

    def test_solvability_identity_reproduces_speed_coefficient(self, u0):
        assert solvability_ratio(u0, S, R) == pytest.approx(
            c1_exact(S, R), rel=1e-6
        )


class TestSecondKernelSolution:
    def test_growth_rate_is_sqrt_S(self, u0):
        rate = second_kernel_growth_rate(u0)
        assert rate == pytest.approx(math.sqrt(S), rel=0.02)

    def test_vanishes_at_origin_and_grows_outward(self, u0):
        v0 = second_kernel_solution(u0)
        center = u0.x.size // 2
        assert v0[center] == 0.0
        assert abs(v0[-1]) > 1e3 * np.abs(v0[center + 1 : center + 50]).max()


class TestRelaxation:
    def test_translation_perturbation_shifts_by_minus_eps(self, u0):
        res = relaxation_shift(u0, u0.du, 0.02)
        assert res.shift_per_eps == pytest.approx(-1.0, abs=0.02)
        assert res.predicted_shift / 0.02 == pytest.approx(-1.0, rel=1e-6)

    def test_odd_perturbation_produces_no_shift(self, u0):
        h = u0.x * np.exp(-(u0.x**2))
        raw, _ = perturbation_projection(u0, h)
        assert abs(raw) < 1e-14
        res = relaxation_shift(u0, h, 0.02)
        assert abs(res.measured_shift) < 1e-3

    def test_shift_scales_linearly_and_matches_normalized_projection(self, u0):
        h = np.exp(-(u0.x**2))
        first = relaxation_shift(u0, h, 0.01)
        second = relaxation_shift(u0, h, 0.02)
        assert second.measured_shift / first.measured_shift == pytest.approx(2.0, rel=0.05)
        # the normalized projection is the prediction that matches the
        # dynamics; the raw integral misses by the normalization factor
        assert first.measured_shift == pytest.approx(first.predicted_shift, rel=0.01)
        assert abs(first.measured_shift - first.predicted_shift_unnormalized) > \
            10.0 * abs(first.measured_shift - first.predicted_shift)

    def test_amplitude_guard(self, u0):
        with pytest.raises(ValueError):
            relaxation_shift(u0, u0.du, 0.2)

    def test_nonconvergence_raises(self, u0):
        from clinewave.pde import SimConfig

        with pytest.raises(ConvergenceError):
            relaxation_shift(u0, u0.du, 0.02,
                             cfg=SimConfig(dt=0.25, t_end=2.0, record_every=8))
