import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from energylab import (
    GridMismatchError,
    InvariantViolationError,
    Grid,
    SpectralField,
    bernstein_gaps,
    beltrami_field,
    field_from_modes,
    from_physical,
    inner_product,
    lebesgue_norm,
    leray_project,
    random_divfree_field,
    shell_spectrum,
    sobolev_norm,
    split,
    taylor_green_field,
    to_physical,
    truncate,
)
from energylab.spectral import VOLUME, resample
from oracles import full_cube, gradient_energy, stencil_divergence

seeds = st.integers(0, 2**31 - 1)
slopes = st.floats(-1.0, 4.0)


def grid_points(n):
    x = 2 * np.pi * np.arange(n) / n
    return np.meshgrid(x, x, x, indexing="ij")


class TestGrid:
    @pytest.mark.parametrize("n, radius, lam", [(8, 2, 4), (16, 5, 25), (32, 10, 100), (64, 21, 441)])
    def test_dealias_sphere(self, n, radius, lam):
        g = Grid(n)
        assert g.dealias_radius == radius
        assert g.lambda_max == lam
        assert g.shape == (3, n, n, n // 2 + 1)
        assert g.k2[g.dealias_mask].max() == lam

    @pytest.mark.parametrize("n", [3, 7, 2, 0, -4])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ValueError):
            Grid(n)

    def test_half_spectrum_weights(self):
        g = Grid(8)
        assert g.wz.ravel().tolist() == [1, 2, 2, 2, 1]


class TestFieldBasics:
    def test_full_cube_matches_loop_oracle(self):
        u = random_divfree_field(Grid(8), 1.0, 3)
        np.testing.assert_array_equal(u.full_coeffs(), full_cube(u))

    def test_coeffs_are_read_only(self):
        u = random_divfree_field(Grid(8), 1.0, 3)
        with pytest.raises(ValueError):
            u.coeffs[0, 1, 0, 0] = 1.0

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            inner_product(Grid(8).zeros(), Grid(16).zeros())
        with pytest.raises(GridMismatchError):
            Grid(8).zeros() + Grid(16).zeros()

    def test_validate_rejects_compressible(self):
        u = field_from_modes(Grid(8), [((1, 0, 0), (1.0, 0.0, 0.0))])
        with pytest.raises(InvariantViolationError, match="divergence"):
            u.validate()
        leray_project(u).validate()

    def test_coeff_lookup_uses_conjugate_symmetry(self):
        u = field_from_modes(Grid(8), [((1, 2, 3), (0.0, 3.0, -2j))])
        np.testing.assert_array_equal(u.coeff((1, 2, 3)), [0.0, 3.0, -2j])
        np.testing.assert_array_equal(u.coeff((-1, -2, -3)), [0.0, 3.0, 2j])

    def test_field_from_modes_rejects(self):
        with pytest.raises(ValueError):
            field_from_modes(Grid(8), [((4, 0, 0), (0, 1, 0))])
        with pytest.raises(ValueError):
            field_from_modes(Grid(8), [((0, 0, 0), (0, 1, 0))])


class TestExactFields:
    def test_taylor_green_matches_formula(self):
        g = Grid(16)
        x, y, z = grid_points(16)
        ref = np.stack([np.sin(x) * np.cos(y) * np.cos(z), -np.cos(x) * np.sin(y) * np.cos(z), 0 * x])
        np.testing.assert_allclose(to_physical(taylor_green_field(g)), ref, atol=1e-14)

    def test_beltrami_matches_formula_and_is_curl_eigenfield(self):
        g = Grid(16)
        a, b, c = 1.0, 0.7, 0.4
        x, y, z = grid_points(16)
        ref = np.stack([a * np.sin(z) + c * np.cos(y), b * np.sin(x) + a * np.cos(z), c * np.sin(y) + b * np.cos(x)])
        u = beltrami_field(g, a, b, c)
        np.testing.assert_allclose(to_physical(u), ref, atol=1e-14)
        kx, ky, kz = g.k_vectors
        cc = u.coeffs
        curl = np.stack([1j * (ky * cc[2] - kz * cc[1]), 1j * (kz * cc[0] - kx * cc[2]), 1j * (kx * cc[1] - ky * cc[0])])
        np.testing.assert_allclose(curl, cc, atol=1e-15)

    def test_frozen_norms(self):
        # [DERIVED] mean-square speed 1/4 and 3 on a (2 pi)^3 box
        g = Grid(16)
        tg = taylor_green_field(g)
        assert tg.energy == pytest.approx(62.01255336059963, rel=1e-15)
        assert sobolev_norm(tg, 1.0) ** 2 == pytest.approx(3 * 62.01255336059963, rel=1e-15)
        assert beltrami_field(g).energy == pytest.approx(744.1506403271956, rel=1e-15)


class TestNorms:
    @settings(max_examples=20, deadline=None)
    @given(seeds, slopes)
    def test_parseval_against_numpy_oracle(self, seed, slope):
        u = random_divfree_field(Grid(12), slope, seed)
        x = to_physical(u)
        assert u.energy == pytest.approx(VOLUME * np.mean(x**2) * 3, rel=1e-12)
        assert sobolev_norm(u, 1.0) ** 2 == pytest.approx(gradient_energy(x), rel=1e-12)

    def test_single_mode_sobolev_norm(self):
        # a mode and its conjugate: (2 pi)^3 * 2 |a|^2 * lambda^s
        u = field_from_modes(Grid(8), [((1, 1, 0), (1.0, -1.0, 0.5j))])
        for s in (0.0, 0.5, 5 / 6, 1.0, 2.0):
            assert sobolev_norm(u, s) ** 2 == pytest.approx(VOLUME * 2 * 2.25 * 2**s, rel=1e-14)

    def test_negative_exponent_rejected(self):
        with pytest.raises(ValueError):
            sobolev_norm(Grid(8).zeros(), -0.5)

    def test_lebesgue_norms(self):
        u = taylor_green_field(Grid(16))
        assert lebesgue_norm(u, 2) == pytest.approx(math.sqrt(u.energy), rel=1e-14)
        assert lebesgue_norm(u, math.inf) == pytest.approx(1.0, rel=1e-14)
        # [DERIVED] mean of |u|^4 for TG is 15/128 (numpy quadrature on 64^3)
        assert lebesgue_norm(u, 4, oversample=2) ** 4 == pytest.approx(VOLUME * 15 / 128, rel=1e-13)
        with pytest.raises(ValueError):
            lebesgue_norm(u, 0.5)

    def test_shell_spectrum_sums_to_energy(self):
        u = random_divfree_field(Grid(16), 5 / 3, 11)
        k, e = shell_spectrum(u)
        assert e.sum() == pytest.approx(u.energy, rel=1e-13)
        assert e[0] == 0.0
        assert k[0] == 0


class TestProjections:
    @settings(max_examples=20, deadline=None)
    @given(seeds)
    def test_leray_idempotent_and_solenoidal(self, seed):
        g = Grid(8)
        rng = np.random.default_rng(seed)
        # Nyquist planes have no real derivative, so compare inside the Galerkin space
        raw = truncate(from_physical(rng.standard_normal(g.physical_shape)))
        p = leray_project(raw)
        np.testing.assert_allclose(leray_project(p).coeffs, p.coeffs, atol=1e-16)
        div = stencil_divergence(to_physical(p))
        assert np.max(np.abs(div)) < 1e-12 * np.max(np.abs(to_physical(raw)))

    @settings(max_examples=30, deadline=None)
    @given(seeds, st.floats(0.1, 40.0))
    def test_split_is_exact(self, seed, kappa):
        u = random_divfree_field(Grid(12), 1.0, seed)
        parts = split(u, kappa)
        np.testing.assert_array_equal((parts.low + parts.high).coeffs, u.coeffs)
        assert inner_product(parts.low, parts.high) == 0.0
        assert np.all(u.grid.k2[np.abs(parts.low.coeffs).max(axis=0) > 0] <= kappa)

    def test_split_rejects_bad_cutoff(self):
        for bad in (0.0, -1.0, math.inf, math.nan):
            with pytest.raises(ValueError):
                split(Grid(8).zeros(), bad)

    def test_truncate_idempotent(self):
        g = Grid(12)
        rng = np.random.default_rng(0)
        u = leray_project(from_physical(rng.standard_normal(g.physical_shape)))
        t = truncate(u)
        assert truncate(t).bit_equal(t)
        assert np.all(t.coeffs[:, ~g.dealias_mask] == 0)


class TestBernstein:
    @settings(max_examples=50, deadline=None)
    @given(seeds, slopes, st.floats(0.5, 30.0), st.floats(0.0, 2.0), st.floats(0.01, 2.0))
    def test_gaps_non_negative(self, seed, slope, kappa, alpha, delta):
        u = random_divfree_field(Grid(12), slope, seed)
        gl, gh = bernstein_gaps(u, kappa, alpha, alpha + delta)
        scale = max(sobolev_norm(u, alpha + delta), sobolev_norm(u, alpha) * kappa ** (delta / 2))
        assert gl >= -1e-13 * scale
        assert gh >= -1e-13 * scale

    def test_requires_beta_above_alpha(self):
        with pytest.raises(ValueError):
            bernstein_gaps(Grid(8).zeros(), 2.0, 1.0, 1.0)


class TestPhysicalTransforms:
    @settings(max_examples=20, deadline=None)
    @given(seeds)
    def test_round_trip(self, seed):
        u = random_divfree_field(Grid(8), 1.0, seed)
        back = from_physical(to_physical(u))
        np.testing.assert_allclose(back.coeffs, u.coeffs, atol=1e-16)

    def test_from_physical_errors(self):
        with pytest.raises(ValueError):
            from_physical(np.zeros((2, 8, 8, 8)))
        with pytest.raises(GridMismatchError):
            from_physical(np.zeros((3, 8, 8, 8)), Grid(16))

    def test_resample_preserves_series(self):
        u = random_divfree_field(Grid(12), 1.0, 5)
        up = resample(u, 24)
        assert up.energy == pytest.approx(u.energy, rel=1e-14)
        assert resample(up, 12).bit_equal(u)


class TestRandomFields:
    def test_deterministic_and_normalized(self):
        g = Grid(16)
        a = random_divfree_field(g, 5 / 3, 42, rms=2.0)
        b = random_divfree_field(g, 5 / 3, 42, rms=2.0)
        assert a.bit_equal(b)
        assert not a.bit_equal(random_divfree_field(g, 5 / 3, 43, rms=2.0))
        assert a.energy / VOLUME == pytest.approx(4.0, rel=1e-13)
        a.validate()
        assert truncate(a).bit_equal(a)

    def test_is_spectral_field(self):
        assert isinstance(random_divfree_field(Grid(8)), SpectralField)


class TestOperationExamples:
    def test_gradient_field_projects_to_zero(self):
        g = Grid(8)
        rng = np.random.default_rng(1)
        phi = truncate(from_physical(np.stack([rng.standard_normal((8, 8, 8))] * 3))).coeffs[0]
        grad = SpectralField._wrap(g, np.stack([1j * k * phi for k in g.k_vectors]))
        assert np.abs(leray_project(grad).coeffs).max() < 1e-16

    def test_solenoidal_field_is_fixed(self):
        u = random_divfree_field(Grid(8), 1.0, 2)
        np.testing.assert_allclose(leray_project(u).coeffs, u.coeffs, rtol=0, atol=1e-15 * np.abs(u.coeffs).max())

    def test_gaussian_coefficients_divergence_against_stencil(self):
        g = Grid(8)
        rng = np.random.default_rng(8)
        raw = truncate(from_physical(rng.standard_normal(g.physical_shape)))
        x = to_physical(leray_project(raw))
        assert np.abs(stencil_divergence(x)).max() <= 1e-13 * np.abs(x).max()

    def test_single_mode_pair_five_sixths(self):
        u = field_from_modes(Grid(8), [((2, 0, 0), (0, 1, 0))])
        u = u * (1 / math.sqrt(u.energy))
        assert sobolev_norm(u, 5 / 6) == pytest.approx(2 ** (5 / 6), rel=1e-14)

    def test_zero_field_norms(self):
        for s in (0.0, 0.5, 1.0, 3.0):
            assert sobolev_norm(Grid(8).zeros(), s) == 0.0

    def test_gradient_energy_16(self):
        u = random_divfree_field(Grid(16), 5 / 3, 21)
        assert sobolev_norm(u, 1.0) ** 2 == pytest.approx(gradient_energy(to_physical(u)), rel=1e-12)

    def test_split_extremes_and_orthogonality(self):
        u = random_divfree_field(Grid(12), 5 / 3, 6)
        full = split(u, u.grid.lambda_max)
        assert np.all(full.high.coeffs == 0) and np.array_equal(full.low.coeffs, u.coeffs)
        none = split(u, 0.5)
        assert np.all(none.low.coeffs == 0) and np.array_equal(none.high.coeffs, u.coeffs)
        parts = split(u, 4.0)
        assert abs(u.energy - parts.low.energy - parts.high.energy) <= 1e-13 * u.energy

    def test_high_gap_single_shell_formula(self):
        kappa = 1.0
        g = Grid(12)
        u = field_from_modes(g, [((2, 0, 0), (0, 1, 1j)), ((0, 0, 2), (1, -1, 0))])  # lambda = 4 kappa
        _, gh = bernstein_gaps(u, kappa, 0.5, 5 / 6)
        expected = (kappa ** (-1 / 6) - (4 * kappa) ** (-1 / 6)) * sobolev_norm(u, 5 / 6)
        assert gh == pytest.approx(expected, rel=1e-13)
        assert gh > 0

    @pytest.mark.slow
    def test_bernstein_sweep_16(self):
        g = Grid(16)
        worst = 0.0
        for seed in range(1000):
            u = random_divfree_field(g, 5 / 3, seed)
            for alpha, beta in ((0.5, 5 / 6), (5 / 6, 1.5)):
                for kappa in (1.0, 4.0, 16.0, 64.0):
                    gl, gh = bernstein_gaps(u, kappa, alpha, beta)
                    scale = max(sobolev_norm(u, beta), sobolev_norm(u, alpha) * kappa ** ((beta - alpha) / 2))
                    worst = min(worst, gl / scale, gh / scale)
        assert worst >= -1e-13

    def test_random_field_invariants(self):
        for seed in (0, 1, 2**31 - 1):
            u = random_divfree_field(Grid(16), 5 / 3, seed)
            assert u.invariant_defects()["divergence"] <= 1e-14

    def test_spectrum_slope(self):
        # least-squares slope of log E(k) vs log k over shells 2..8
        k, e = shell_spectrum(random_divfree_field(Grid(32), 5 / 3, 0))
        slope = np.polyfit(np.log(k[2:9]), np.log(e[2:9]), 1)[0]
        assert abs(slope + 5 / 3) <= 0.2

    def test_single_mode_samples(self):
        u = field_from_modes(Grid(8), [((1, 0, 0), (0, 0.5, 0))])  # cos(x) e_y
        x, _, _ = grid_points(8)
        ref = np.stack([0 * x, np.cos(x), 0 * x])
        np.testing.assert_allclose(to_physical(u), ref, rtol=0, atol=1e-14)

    def test_l4_of_cosine(self):
        u = field_from_modes(Grid(16), [((1, 0, 0), (0, 0.5, 0))])
        assert lebesgue_norm(u, 4) == pytest.approx((VOLUME * 3 / 8) ** 0.25, rel=1e-14)

    def test_l2_matches_sobolev_zero(self):
        u = random_divfree_field(Grid(16), 5 / 3, 3)
        assert lebesgue_norm(u, 2) == pytest.approx(sobolev_norm(u, 0), rel=1e-12)

    def test_l4_grid_refinement(self):
        u = random_divfree_field(Grid(8), 5 / 3, 3)
        a = lebesgue_norm(resample(u, 32), 4)
        b = lebesgue_norm(resample(u, 64), 4)
        assert a == pytest.approx(b, rel=1e-10)
