"""Frequency-domain primitives checked against naive double-sum oracles."""

import numpy as np
import pytest

from ttalab.spectrum import (
    Spectrum,
    checkerboard_score,
    circular_convolve,
    dft2,
    idft2,
    magnitude_csv,
    upsample2x,
)


def naive_dft2(x):
    """Direct O(M^2 N^2) evaluation of the mean-normalized forward transform."""
    x = np.asarray(x, dtype=np.float64)
    m, n = x.shape
    out = np.zeros((m, n), dtype=np.complex128)
    for u in range(m):
        for v in range(n):
            acc = 0.0 + 0.0j
            for i in range(m):
                for j in range(n):
                    acc += x[i, j] * np.exp(-2j * np.pi * (u * i / m + v * j / n))
            out[u, v] = acc / (m * n)
    return out


def naive_circular_convolve(a, b):
    """Direct cyclic convolution with the 1/(M*N) factor."""
    m, n = a.shape
    out = np.zeros((m, n), dtype=np.float64)
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for k in range(m):
                for l in range(n):
                    acc += a[k, l] * b[(i - k) % m, (j - l) % n]
            out[i, j] = acc / (m * n)
    return out


class TestDft2:
    def test_constant_image_is_dc_only(self):
        c = 0.7
        spec = dft2(np.full((4, 4), c))
        assert spec.coeffs[0, 0] == pytest.approx(c, abs=1e-12)
        rest = spec.coeffs.copy()
        rest[0, 0] = 0
        assert np.abs(rest).max() < 1e-12

    def test_unit_impulse_has_flat_spectrum(self):
        x = np.zeros((2, 2))
        x[0, 0] = 1.0
        spec = dft2(x)
        np.testing.assert_allclose(spec.coeffs, 0.25, atol=1e-14)

    def test_matches_naive_double_sum(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(8, 8))
        np.testing.assert_allclose(dft2(x).coeffs, naive_dft2(x), atol=1e-10)

    def test_non_power_of_two_matches_oracle(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(6, 10))
        np.testing.assert_allclose(dft2(x).coeffs, naive_dft2(x), atol=1e-10)

    def test_empty_matrix_rejected(self):
        with pytest.raises(ValueError):
            dft2(np.zeros((0, 4)))
        with pytest.raises(ValueError):
            dft2(np.zeros(5))

    def test_hermitian_symmetry_for_real_input(self):
        rng = np.random.default_rng(9)
        for shape in [(4, 4), (5, 7), (8, 6)]:
            c = dft2(rng.normal(size=shape)).coeffs
            m, n = shape
            for u in range(m):
                for v in range(n):
                    assert c[u, v] == pytest.approx(
                        np.conj(c[(m - u) % m, (n - v) % n]), abs=1e-12
                    )

    def test_parseval_energy_constant(self):
        # sum|x|^2 == M*N * sum|X|^2 under the mean-normalized forward transform
        rng = np.random.default_rng(10)
        x = rng.normal(size=(8, 8))
        spec = dft2(x)
        lhs = np.sum(x**2)
        rhs = x.size * np.sum(np.abs(spec.coeffs) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-12)


class TestIdft2:
    def test_round_trip(self):
        rng = np.random.default_rng(11)
        x = rng.uniform(size=(4, 4))
        res = idft2(dft2(x))
        np.testing.assert_allclose(res.image, x, atol=1e-9)
        assert res.imag_residual < 1e-9
        assert not res.hermitian_warning

    def test_dc_only_gives_constant(self):
        coeffs = np.zeros((4, 6), dtype=np.complex128)
        coeffs[0, 0] = 0.3
        res = idft2(Spectrum(coeffs))
        np.testing.assert_allclose(res.image, 0.3, atol=1e-12)

    def test_hermitian_spectrum_round_trips(self):
        rng = np.random.default_rng(12)
        spec = dft2(rng.normal(size=(8, 8)))  # Hermitian by construction
        res = idft2(spec)
        assert not res.hermitian_warning
        back = dft2(res.image)
        np.testing.assert_allclose(back.coeffs, spec.coeffs, atol=1e-9)

    def test_non_hermitian_input_flagged(self):
        coeffs = np.zeros((4, 4), dtype=np.complex128)
        coeffs[1, 1] = 1.0  # lone off-DC coefficient cannot come from a real image
        res = idft2(Spectrum(coeffs))
        assert res.hermitian_warning
        assert res.imag_residual > 1e-3


class TestCircularConvolve:
    def test_identity_kernel(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(5, 5))
        kernel = np.zeros_like(x)
        kernel[0, 0] = x.size  # M*N * delta is the identity under this scaling
        np.testing.assert_allclose(circular_convolve(x, kernel), x, atol=1e-12)

    def test_zero_input_gives_zero(self):
        assert np.all(circular_convolve(np.zeros((3, 3)), np.ones((3, 3))) == 0)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            circular_convolve(np.zeros((3, 3)), np.zeros((4, 3)))

    def test_spectra_multiply_independent_sides(self):
        # Both sides from naive oracles: spatial double-sum vs product of double-sum DFTs.
        rng = np.random.default_rng(14)
        a = rng.normal(size=(8, 8))
        b = rng.normal(size=(8, 8))
        spatial = naive_circular_convolve(a, b)
        lhs = naive_dft2(spatial)
        rhs = naive_dft2(a) * naive_dft2(b)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)
        # and the fast implementation agrees with the spatial oracle
        np.testing.assert_allclose(circular_convolve(a, b), spatial, atol=1e-10)

    def test_convolution_theorem_hundred_pairs(self):
        rng = np.random.default_rng(15)
        for _ in range(100):
            a = rng.normal(size=(8, 8))
            b = rng.normal(size=(8, 8))
            lhs = dft2(circular_convolve(a, b)).coeffs
            rhs = dft2(a).coeffs * dft2(b).coeffs
            scale = np.abs(rhs).max()
            assert np.abs(lhs - rhs).max() <= 1e-8 * max(scale, 1e-30)


class TestUpsample2x:
    def test_single_pixel(self):
        out = upsample2x(np.array([[3.5]]))
        np.testing.assert_array_equal(out, [[3.5, 0.0], [0.0, 0.0]])

    def test_sum_preserved(self):
        rng = np.random.default_rng(16)
        x = rng.uniform(size=(5, 7))
        assert upsample2x(x).sum() == pytest.approx(x.sum(), rel=1e-12)

    def test_spectrum_tiles_with_quarter_scale(self):
        rng = np.random.default_rng(17)
        x = rng.normal(size=(4, 4))
        base = naive_dft2(x)
        up = naive_dft2(upsample2x(x))
        m, n = x.shape
        quadrants = [up[:m, :n], up[m:, :n], up[:m, n:], up[m:, n:]]
        for q in quadrants:
            np.testing.assert_allclose(q, base / 4.0, atol=1e-9)
        for q in quadrants[1:]:
            np.testing.assert_allclose(q, quadrants[0], atol=1e-9)

    def test_fast_path_matches_oracle_tiling(self):
        rng = np.random.default_rng(18)
        x = rng.normal(size=(4, 4))
        up = dft2(upsample2x(x)).coeffs
        m, n = x.shape
        first = up[:m, :n]
        for q in (up[m:, :n], up[:m, n:], up[m:, n:]):
            np.testing.assert_allclose(q, first, atol=1e-9)
        np.testing.assert_allclose(first, dft2(x).coeffs / 4.0, atol=1e-9)


class TestCheckerboardScore:
    def test_upsampled_scores_higher(self):
        rng = np.random.default_rng(19)
        for _ in range(5):
            x = rng.uniform(size=(8, 8))
            plain = checkerboard_score(dft2(np.pad(x, ((0, 8), (0, 8)), mode="wrap")))
            upped = checkerboard_score(dft2(upsample2x(x)))
            assert upped.value > plain.value

    def test_white_image_scores_zero(self):
        assert checkerboard_score(dft2(np.ones((8, 8)))).value == 0.0

    def test_all_zero_spectrum_scores_zero(self):
        assert checkerboard_score(Spectrum(np.zeros((8, 8), dtype=complex))).value == 0.0

    def test_low_pass_reduces_score(self):
        rng = np.random.default_rng(20)
        x = rng.uniform(size=(8, 8))
        up = upsample2x(x)
        m, n = up.shape
        # wide periodic Gaussian kernel, DC gain 1 under the 1/(M*N) convolution
        ii = np.minimum(np.arange(m), m - np.arange(m))
        jj = np.minimum(np.arange(n), n - np.arange(n))
        kern = np.exp(-(ii[:, None] ** 2 + jj[None, :] ** 2) / (2 * 2.0**2))
        kern *= m * n / kern.sum()
        blurred = circular_convolve(up, kern)
        assert checkerboard_score(dft2(blurred)).value < checkerboard_score(dft2(up)).value

    def test_score_in_unit_interval(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            s = checkerboard_score(dft2(rng.uniform(size=(8, 8))))
            assert 0.0 <= s.value <= 1.0

    def test_grid_period_must_divide(self):
        with pytest.raises(ValueError):
            checkerboard_score(dft2(np.ones((6, 6))), grid_period=4)


def test_magnitude_csv_round_trip(tmp_path):
    rng = np.random.default_rng(22)
    spec = dft2(rng.uniform(size=(8, 8)))
    path = tmp_path / "spec.csv"
    magnitude_csv(spec, str(path))
    data = np.loadtxt(path, delimiter=",")
    np.testing.assert_allclose(data, np.log1p(np.abs(spec.coeffs)), rtol=1e-9)
