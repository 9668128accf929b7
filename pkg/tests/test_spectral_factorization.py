import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlft import (
    CoefficientSequence,
    LaurentPolynomial,
    RationalFunction,
    UnitCircleGrid,
    a_from_b_laurent,
    a_from_b_rational,
    nlft_finite,
    outer_from_modulus,
    random_batch,
    sample,
    spectral_factor_rational,
)
from nlft.forward_nlft import quadrature_grid_size
from nlft.errors import NonFiniteSamples, OddPoleOrderOnT, RootClassificationAmbiguous


@st.composite
def sequences(draw, window=12, max_modulus=0.5):
    n = draw(st.integers(1, window))
    start = draw(st.integers(-6, 6))
    r = np.array(draw(st.lists(st.floats(1e-3, max_modulus), min_size=n, max_size=n)))
    t = np.array(draw(st.lists(st.floats(0, 2 * np.pi), min_size=n, max_size=n)))
    return CoefficientSequence(start, r * np.exp(1j * t))


def defect(a, b):
    d = a * a.star() - (1 + b * b.star())
    return 0.0 if d.is_zero() else float(np.max(np.abs(d.coeffs)))


class TestLaurent:
    def test_zero(self):
        assert a_from_b_laurent(LaurentPolynomial.zero()).allclose(LaurentPolynomial.constant(1.0))

    def test_monomial(self):
        a = a_from_b_laurent(LaurentPolynomial.monomial(1.0, 1))
        assert a.allclose(LaurentPolynomial.constant(np.sqrt(2)))
        single = nlft_finite(CoefficientSequence(1, [1 / np.sqrt(2)]))
        assert a.allclose(single.a / single.a.coefficient(0) * np.sqrt(2))

    def test_affine(self):
        b = LaurentPolynomial(0, [0.5, 1.0])
        a = a_from_b_laurent(b)
        zeta = (-9 + np.sqrt(65)) / 4
        # a = c (1 - zeta / z) with c > 0 fixed by a a* = 1 + b b*.
        assert (a.lo, a.hi) == (-1, 0)
        assert abs(-a.coefficient(-1) / a.coefficient(0) - zeta) < 1e-12
        assert a.coefficient(0).real > 0 and abs(a.coefficient(0).imag) < 1e-15
        assert defect(a, b) < 1e-12

    def test_ambiguous_root_on_circle(self):
        # For b = c (1 + z) the roots of 1 + b b* sit about 1/c from -1.
        b = LaurentPolynomial(0, [1e10, 1e10])
        with pytest.raises(RootClassificationAmbiguous):
            a_from_b_laurent(b)

    @given(sequences())
    @settings(max_examples=60)
    def test_uniqueness_well_conditioned(self, F):
        p = nlft_finite(F)
        assert p.a.allclose(a_from_b_laurent(p.b), 1e-9)

    def test_uniqueness_degrades_like_sup_a_squared(self):
        # On the acceptance distribution the error tracks eps * sup|a|^2.
        worst = 0.0
        for F in random_batch(100, 32, 0.9, seed=0):
            p = nlft_finite(F)
            a = a_from_b_laurent(p.b)
            lo, hi = min(a.lo, p.a.lo), 0
            err = float(np.max(np.abs(a.dense(lo, hi) - p.a.dense(lo, hi))))
            sup_a = float(np.max(np.abs(p.samples(1024)[0])))
            worst = max(worst, err / sup_a ** 2)
        assert worst < 1e-12

    @given(sequences(), st.floats(0, 2 * np.pi))
    @settings(max_examples=40)
    def test_modulation_invariance(self, F, theta):
        b = nlft_finite(F).b
        assert a_from_b_laurent(b).allclose(a_from_b_laurent(b * np.exp(1j * theta)), 1e-9)

    @given(sequences())
    @settings(max_examples=40)
    def test_defect(self, F):
        b = nlft_finite(F).b
        assert defect(a_from_b_laurent(b), b) < 1e-9


class TestRational:
    def test_circle_pole_pair(self):
        a = a_from_b_rational(RationalFunction([1, 1], [-1, 1]))
        z = np.exp(1j * np.linspace(0.2, 6.0, 13))
        assert np.allclose(a(z), 2 * z / (z - 1), atol=1e-10)

    def test_constant(self):
        a = a_from_b_rational(RationalFunction.constant(0.75))
        assert abs(a(0.3 + 0.2j) - 1.25) < 1e-14

    def test_pole_outside(self):
        b = RationalFunction([1], [-2, 1])
        a = a_from_b_rational(b)
        z = UnitCircleGrid.nodes(256)
        f = np.abs(a(z)) ** 2 / (1 + np.abs(b(z)) ** 2)
        assert np.max(np.abs(f - 1)) < 1e-8
        assert a.value_at_infinity().real > 0
        for r, _ in a.reduced().zeros():
            assert abs(r) < 1
        for r, _ in a.reduced().poles():
            assert abs(r) < 1

    def test_laurent_input_agrees(self):
        F = CoefficientSequence(-1, [0.3, -0.2j, 0.4])
        p = nlft_finite(F)
        a = a_from_b_rational(p.b.to_rational())
        z = np.exp(1j * np.linspace(0, 6, 17))
        assert np.allclose(a(z), p.a(z), atol=1e-9)

    def test_odd_pole_on_circle(self):
        g = RationalFunction([1], [-1, 1])
        with pytest.raises(OddPoleOrderOnT):
            spectral_factor_rational(g)


class TestOuter:
    def test_constant(self):
        g = outer_from_modulus(UnitCircleGrid(64, np.full(64, np.log(3.0))))
        assert np.allclose(g.samples, 3.0)

    def test_simple_outer(self):
        a = LaurentPolynomial(-1, [0.5, 1.0])
        s = sample(a, 256).samples
        g = outer_from_modulus(UnitCircleGrid(256, np.log(np.abs(s))))
        assert np.max(np.abs(g.samples - s)) < 1e-9

    def test_transform_a_is_outer(self):
        worst = hol = 0.0
        for F in random_batch(50, 12, 0.8, seed=31):
            p = nlft_finite(F)
            M = quadrature_grid_size(F)
            a = sample(p.a, M).samples
            g = outer_from_modulus(UnitCircleGrid(M, np.log(np.abs(a))))
            worst = max(worst, float(np.max(np.abs(g.samples - a))))
            spectrum = np.fft.fft(g.samples) / M
            hol = max(hol, float(np.max(np.abs(spectrum[1:M // 2]))))
        assert worst < 1e-8 and hol < 1e-8

    def test_non_finite(self):
        with pytest.raises(NonFiniteSamples):
            outer_from_modulus(UnitCircleGrid(8, [0, 0, np.inf, 0, 0, 0, 0, 0]))
