from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlft import (
    CoefficientSequence,
    LaurentPolynomial,
    RationalFunction,
    SchurFunction,
    SU11Pair,
    invert_full_line,
    layer_strip_finite,
    nlft_finite,
    random_batch,
    reflection_quotient,
    schur_algorithm,
    schur_algorithm_exact,
)
from nlft.errors import ModulusReachedOne, NotInH, NotInImage, PeelDivergence, TruncationExhausted
from nlft.inverse_nlft import GaussianRational, retransform_deviation, schur_log_energy

ROOT43 = np.sqrt(4 / 3)


def circle_pole_pair():
    return SU11Pair(RationalFunction([0, 2], [-1, 1]), RationalFunction([1, 1], [-1, 1]))


@st.composite
def sequences(draw, window=16, max_modulus=0.7, start=None):
    n = draw(st.integers(1, window))
    s = draw(st.integers(-8, 8)) if start is None else start
    r = np.array(draw(st.lists(st.floats(0, max_modulus), min_size=n, max_size=n)))
    t = np.array(draw(st.lists(st.floats(0, 2 * np.pi), min_size=n, max_size=n)))
    return CoefficientSequence(s, r * np.exp(1j * t))


def roundtrip_error(F):
    try:
        G = layer_strip_finite(nlft_finite(F))
    except PeelDivergence:
        return np.inf
    lo, hi = F.start, F.stop - 1
    if G.support() is not None:
        lo, hi = min(lo, G.start), max(hi, G.stop - 1)
    return float(np.max(np.abs(G.restrict(lo, hi).values - F.restrict(lo, hi).values)))


class TestLayerStripping:
    def test_single_entry(self):
        p = SU11Pair(LaurentPolynomial.constant(ROOT43), LaurentPolynomial.constant(ROOT43 * 0.5))
        F = layer_strip_finite(p)
        assert F.support() == (0, 0) and abs(F[0] - 0.5) < 1e-15

    def test_two_entries(self):
        s, t = 0.3 - 0.2j, 0.5 + 0.4j
        F = layer_strip_finite(nlft_finite(CoefficientSequence(0, [s, t])))
        assert abs(F[0] - s) < 1e-15 and abs(F[1] - t) < 1e-15

    def test_identity(self):
        assert layer_strip_finite(SU11Pair.identity()).support() is None

    def test_not_in_image(self):
        p = SU11Pair(LaurentPolynomial.constant(1.0), LaurentPolynomial.constant(0.5))
        with pytest.raises(NotInImage):
            layer_strip_finite(p)

    @given(sequences())
    @settings(max_examples=80)
    def test_roundtrip_moderate_data(self, F):
        assert roundtrip_error(F) < 1e-9

    def test_roundtrip_invariant_large_data(self):
        # Stated invariant: 1000 sequences, |F_n| <= 0.95, window <= 64.
        errors = np.array([roundtrip_error(F) for F in random_batch(1000, 64, 0.95, seed=40)])
        print(f"roundtrip |F| <= 0.95, window 64: {int(np.sum(np.isinf(errors)))} diverged, "
              f"{int(np.sum(errors >= 1e-9))}/1000 above 1e-9, median {np.median(errors):.2e}")
        assert errors.max() < 1e-9

    def test_roundtrip_error_tracks_sup_a_squared(self):
        # Peeling amplifies coefficient rounding by about max|a|^2.
        worst = 0.0
        for F in random_batch(1000, 64, 0.95, seed=40):
            scale = np.finfo(float).eps * float(np.max(np.abs(nlft_finite(F).a.coeffs))) ** 2
            if scale < 1e-3:
                worst = max(worst, roundtrip_error(F) / scale)
        assert worst < 100


class TestSchur:
    def test_zero(self):
        res = schur_algorithm(RationalFunction.constant(0.0), 5)
        assert np.all(res.sequence.values == 0)

    def test_constant(self):
        g = 0.3 - 0.4j
        res = schur_algorithm(RationalFunction.constant(g), 6)
        assert abs(res.sequence.values[0] - g) < 1e-15
        assert np.all(np.abs(res.sequence.values[1:]) < 1e-15)

    def test_exact_affine_datum(self):
        out = schur_algorithm_exact([Fraction(-1, 2), Fraction(-1, 2)], [1], 60)
        assert out[0] == GaussianRational(Fraction(-1, 2), Fraction(0))
        for n in range(1, 60):
            assert out[n] == GaussianRational(Fraction(-2, 2 * n + 1), Fraction(0))

    def test_numeric_affine_datum(self):
        res = schur_algorithm(RationalFunction([-0.5, -0.5]), 51)
        expected = np.array([-0.5] + [-2 / (2 * n + 1) for n in range(1, 51)])
        assert np.max(np.abs(res.sequence.values - expected)) < 1e-10

    def test_remainder_after_n_steps(self):
        n = 7
        res = schur_algorithm(RationalFunction([-0.5, -0.5]), n)
        z = np.array([0.3, -0.2 + 0.4j, 0.5j])
        expected = -2 / ((2 * n + 1) - (2 * n - 1) * z)
        assert np.allclose(res.remainder(z), expected, atol=1e-12)

    def test_energy_ledger(self):
        r = RationalFunction.from_roots(0.4, [0.5j, -0.3], [2.0, -1.5 + 1j])
        res = schur_algorithm(r, 20)
        assert np.max(np.abs(res.ledger_defects())) < 1e-8
        assert np.all(np.diff(res.energies) <= 1e-12)
        total = -np.sum(np.log1p(-np.abs(res.sequence.values) ** 2))
        assert total <= schur_log_energy(r) + 1e-10

    def test_taylor_agrees_with_rational(self):
        r = RationalFunction.from_roots(0.4, [0.5j], [2.0])
        rational = schur_algorithm(r, 12).sequence.values
        K = 60
        taylor_coeffs = np.array([r.num[0] / r.den[0]] + [0] * (K - 1), dtype=complex)
        # Series of 0.4 (z - 0.5i) / (z - 2) computed by long division.
        num = np.r_[r.num, np.zeros(K)]
        den = r.den
        for k in range(K):
            taylor_coeffs[k] = num[k] / den[0]
            num[k:k + den.size] -= taylor_coeffs[k] * den
        taylor = schur_algorithm(SchurFunction.from_taylor(taylor_coeffs), 12).sequence.values
        assert np.max(np.abs(rational - taylor)) < 1e-10

    def test_modulus_reached_one(self):
        with pytest.raises(ModulusReachedOne):
            schur_algorithm(SchurFunction.from_taylor([1.0, 0, 0]), 2)

    def test_truncation_exhausted(self):
        with pytest.raises(TruncationExhausted):
            schur_algorithm(SchurFunction.from_taylor([0.1, 0.2, 0.1]), 10)

    @given(sequences(window=10, start=0))
    @settings(max_examples=40)
    def test_schur_matches_layer_stripping(self, F):
        p = nlft_finite(F)
        res = schur_algorithm(reflection_quotient(p), len(F), energy_grid=None)
        assert np.max(np.abs(res.sequence.values - layer_strip_finite(p).restrict(0, len(F) - 1).values)) < 1e-9


class TestReflectionQuotient:
    def test_identity(self):
        assert reflection_quotient(SU11Pair.identity()).value_at_zero() == 0

    def test_circle_pole_pair(self):
        r = reflection_quotient(circle_pole_pair())
        z = np.array([0.2, 0.5j, -0.7 + 0.1j])
        assert np.allclose(r(z), -(z + 1) / 2, atol=1e-12)

    def test_single_entry(self):
        r = reflection_quotient(nlft_finite(CoefficientSequence(0, [0.5])))
        assert abs(r.value_at_zero() - 0.5) < 1e-15
        assert abs(r(0.7) - 0.5) < 1e-15

    def test_not_in_h(self):
        # b has a pole inside the disc while a* is zero-free there.
        p = SU11Pair(RationalFunction([1]), RationalFunction([1], [-0.5, 1]))
        with pytest.raises(NotInH):
            reflection_quotient(p)


class TestFullLine:
    def test_identity(self):
        inv = invert_full_line(SU11Pair.identity(), steps=10)
        assert inv.sequence.support() is None

    def test_two_sided_finite(self):
        F = CoefficientSequence(-3, [0.2, -0.1j, 0.3, 0.4 + 0.1j, -0.25, 0.1])
        inv = invert_full_line(nlft_finite(F), steps=20)
        assert np.max(np.abs(inv.sequence.restrict(-3, 2).values - F.values)) < 1e-9
        assert np.max(np.abs(inv.sequence.restrict(-20, -4).values), initial=0) < 1e-9
        assert np.max(np.abs(inv.sequence.restrict(3, 20).values), initial=0) < 1e-9

    def test_circle_pole_pair_max_right(self):
        inv = invert_full_line(circle_pole_pair(), steps=30, policy="max-right")
        expected = np.array([-0.5] + [-2 / (2 * n + 1) for n in range(1, 30)])
        assert np.max(np.abs(inv.sequence.restrict(0, 29).values - expected)) < 1e-10
        assert np.all(inv.sequence.restrict(-10, -1).values == 0)

    def test_circle_pole_pair_two_representatives(self):
        p = circle_pole_pair()
        left = invert_full_line(p, steps=200, policy="min-right")
        right = invert_full_line(p, steps=200, policy="max-right")
        assert left.sequence.support()[1] <= 0 <= right.sequence.support()[0]
        assert retransform_deviation(left, p) < 1e-6
        assert retransform_deviation(right, p) < 1e-6
