import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlft import CoefficientSequence, RationalFunction, SU11Pair, UnitCircleGrid, nlft_finite, random_batch, roots
from nlft.errors import InputError, RankDeficient
from nlft.opuc_bridge import (
    MAX_MEASURE_GRID,
    MeasureDensity,
    bochner_check,
    gram_matrix,
    gram_schmidt_oracle,
    hessenberg_entries,
    herglotz_m,
    measure_density_finite,
    orthogonal_polys,
    recursion_defects,
    reversed_star,
    szego_check,
)

GAMMA = 0.4 - 0.3j


@st.composite
def half_line(draw, window=10, max_modulus=0.8):
    n = draw(st.integers(1, window))
    r = np.array(draw(st.lists(st.floats(0, max_modulus), min_size=n, max_size=n)))
    t = np.array(draw(st.lists(st.floats(0, 2 * np.pi), min_size=n, max_size=n)))
    return CoefficientSequence(1, r * np.exp(1j * t))


def single():
    return CoefficientSequence(1, [GAMMA])


class TestHerglotz:
    def test_identity(self):
        assert np.allclose(herglotz_m(SU11Pair.identity(), [0, 0.5j, -0.3]), 1)

    def test_circle_pole_pair(self):
        p = SU11Pair(RationalFunction([0, 2], [-1, 1]), RationalFunction([1, 1], [-1, 1]))
        assert abs(herglotz_m(p, 0) - 3) < 1e-12

    def test_single_entry_at_origin(self):
        assert abs(herglotz_m(nlft_finite(single()), 0) - 1) < 1e-15

    @given(half_line())
    @settings(max_examples=40)
    def test_positive_real_part(self, F):
        z = 0.95 * np.exp(1j * np.linspace(0, 2 * np.pi, 32, endpoint=False))
        assert np.min(herglotz_m(nlft_finite(F), np.r_[z, 0.5 * z]).real) >= 0

    def test_outside_disc(self):
        with pytest.raises(InputError):
            herglotz_m(SU11Pair.identity(), 1.0)


class TestDensity:
    def test_zero_sequence(self):
        w = measure_density_finite(CoefficientSequence(1, [0.0]), M=64)
        assert np.allclose(w.values, 1) and abs(w.total_mass - 1) < 1e-15

    def test_single_entry(self):
        w = measure_density_finite(single(), M=256)
        z = UnitCircleGrid.nodes(256)
        expected = (1 - abs(GAMMA) ** 2) / np.abs(z + np.conj(GAMMA)) ** 2
        assert np.max(np.abs(w.values - expected)) < 1e-13

    def test_mass_is_one(self):
        errors = np.array([abs(measure_density_finite(F).total_mass - 1)
                           for F in random_batch(50, 16, 0.9, seed=5, start=1)])
        print(f"mass error: max {errors.max():.2e}, {int(np.sum(errors >= 1e-10))}/50 above 1e-10")
        assert errors.max() < 1e-10

    def test_mass_error_only_where_grid_is_capped(self):
        # The density peaks at distance delta from the circle; the grid needs about 40 / delta nodes.
        for F in random_batch(50, 16, 0.9, seed=5, start=1):
            zeros = roots(orthogonal_polys(F, len(F))[-1].dense(0, len(F)))
            delta = 1 - np.max(np.abs(zeros))
            if 40 / delta <= MAX_MEASURE_GRID:
                assert abs(measure_density_finite(F).total_mass - 1) < 1e-10

    def test_rejects_nonpositive_indices(self):
        with pytest.raises(InputError):
            measure_density_finite(CoefficientSequence(0, [0.3, 0.2]))


class TestPolynomials:
    def test_zero_sequence(self):
        for n, phi in enumerate(orthogonal_polys(CoefficientSequence(1, [0.0]), 5)):
            assert phi.allclose(phi.monomial(1.0, n))

    def test_single_entry(self):
        phi1 = orthogonal_polys(single(), 1)[1]
        expected = np.array([np.conj(GAMMA), 1]) / np.sqrt(1 - abs(GAMMA) ** 2)
        assert np.max(np.abs(phi1.dense(0, 1) - expected)) < 1e-15

    @given(half_line())
    @settings(max_examples=40)
    def test_degree_and_leading_coefficient(self, F):
        N = len(F) + 2
        lead = np.cumprod(np.r_[1, 1 / np.sqrt(1 - np.abs(np.r_[F.values, 0, 0]) ** 2)])
        for n, phi in enumerate(orthogonal_polys(F, N)):
            c = phi.dense(0, n)
            assert abs(c[-1] - lead[n]) < 1e-12 * lead[n]

    @given(half_line())
    @settings(max_examples=40)
    def test_recursions(self, F):
        scale = float(np.prod(1 / np.sqrt(1 - np.abs(F.values) ** 2)))
        defects = recursion_defects(F, len(F) + 2)
        assert max(defects.values()) < 1e-12 * scale

    def test_gram_identity(self):
        for F in random_batch(20, 10, 0.8, seed=6, start=1):
            w = measure_density_finite(F)
            G = gram_matrix(orthogonal_polys(F, 12), w)
            assert np.max(np.abs(G - np.eye(13))) < 1e-9

    def test_reversed_norm_and_inner_product_with_one(self):
        for F in random_batch(20, 10, 0.8, seed=7, start=1):
            N = len(F)
            w = measure_density_finite(F)
            z = UnitCircleGrid.nodes(w.M)
            phi = orthogonal_polys(F, N)[N].dense(0, N)
            rev = np.polynomial.polynomial.polyval(z, reversed_star(phi))
            assert abs(w.inner(rev, rev) - 1) < 1e-9
            expected = np.prod(np.sqrt(1 - np.abs(F.values) ** 2))
            assert abs(w.inner(rev, np.ones_like(z)) - expected) < 1e-9


class TestHessenberg:
    def test_zero_sequence(self):
        band = hessenberg_entries(CoefficientSequence(1, [0.0]), 6)
        assert np.all(band.diag == 0) and np.all(band.subdiag == 1)

    def test_single_entry(self):
        band = hessenberg_entries(single(), 4)
        assert band.diag[0] == -np.conj(GAMMA) and np.all(band.diag[1:] == 0)
        assert abs(band.subdiag[0] - np.sqrt(1 - abs(GAMMA) ** 2)) < 1e-15
        assert np.all(band.subdiag[1:] == 1)

    def test_matches_gram_schmidt(self):
        for F in random_batch(20, 10, 0.9, seed=8, start=1):
            band = hessenberg_entries(F, 10)
            oracle = gram_schmidt_oracle(measure_density_finite(F), 10).band(10)
            assert np.max(np.abs(band.diag - oracle.diag)) < 1e-7
            assert np.max(np.abs(band.subdiag - oracle.subdiag)) < 1e-7


class TestGramSchmidt:
    def test_lebesgue(self):
        res = gram_schmidt_oracle(MeasureDensity.from_samples(np.ones(64)), 6)
        for n, phi in enumerate(res.polynomials):
            assert phi.allclose(phi.monomial(1.0, n), 1e-13)
        assert np.max(np.abs(res.matrix - np.eye(7, k=-1))) < 1e-13

    def test_single_entry(self):
        res = gram_schmidt_oracle(measure_density_finite(single()), 3)
        assert res.polynomials[1].allclose(orthogonal_polys(single(), 1)[1], 1e-9)

    def test_columns_orthonormal(self):
        for F in random_batch(10, 8, 0.8, seed=9, start=1):
            N = 10
            H = gram_schmidt_oracle(measure_density_finite(F), N).matrix[:, :N]
            assert np.max(np.abs(H.conj().T @ H - np.eye(N))) < 1e-8
            assert np.max(np.abs(np.tril(H, -2))) < 1e-8

    def test_rank_deficient(self):
        w = MeasureDensity.from_samples([1.0, 0, 0, 0, 1.0, 0, 0, 0])
        with pytest.raises(RankDeficient):
            gram_schmidt_oracle(w, 4)


class TestSzego:
    def test_zero_sequence(self):
        r = szego_check(CoefficientSequence(1, [0.0]), 4)
        assert abs(r.lhs - 1) < 1e-14 and abs(r.rhs - 1) < 1e-14

    def test_single_entry(self):
        for D in (1, 4):
            r = szego_check(single(), D)
            target = 1 - abs(GAMMA) ** 2
            assert abs(r.lhs - target) < 1e-12 and abs(r.rhs - target) < 1e-12

    def test_random(self):
        for F in random_batch(20, 8, 0.9, seed=10, start=1):
            r = szego_check(F, 32)
            assert abs(r.lhs - r.rhs) < 1e-8 and abs(r.cauchy_gap) < 1e-8


class TestBochner:
    def test_lebesgue(self):
        r = bochner_check(MeasureDensity.from_samples(np.ones(64)), 8)
        assert abs(r.moments[8] - 1) < 1e-15 and np.max(np.abs(np.delete(r.moments, 8))) < 1e-15
        assert r.passed

    def test_single_entry(self):
        assert bochner_check(measure_density_finite(single()), 12, trials=1000).passed

    def test_peaked_density(self):
        theta = 2 * np.pi * np.arange(1024) / 1024
        w = np.exp(400 * (np.cos(theta) - 1))
        r = bochner_check(MeasureDensity.from_samples(w / np.mean(w)), 4)
        assert r.passed
        assert np.min(np.abs(r.moments)) > 0.98 * r.moments[4].real
