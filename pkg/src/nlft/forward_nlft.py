"""Forward nonlinear Fourier transform of finite and truncated sequences.

The transform of ``F`` is the ordered product, over increasing ``n``, of the
transfer matrices ``(1 - |F_n|^2)^(-1/2) (1, F_n z^n)``.  Besides the
transform itself this module carries the four symmetry actions, the
multilinear expansion and the quadrature checks of the Plancherel identity
and of the first two sum rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, Optional, Union

import numpy as np

from .errors import InputError, NonUnimodularModulation
from .laurent_core import ROUNDING_TOL, LaurentPolynomial, UnitCircleGrid, next_power_of_two, roots, sample
from .su11_pairs import CoefficientSequence, SU11Pair

TAIL_CONSTANT = 8.0
PEAK_RESOLUTION = 40.0
MAX_QUADRATURE_GRID = 1 << 24


def nlft_finite(F: CoefficientSequence) -> SU11Pair:
    """Ordered product of transfer matrices as an exact Laurent pair.

    ``a`` occupies exponents ``[s - e, 0]`` and ``b`` occupies ``[s, e]``
    where ``[s, e]`` is the stored window of ``F``.
    """
    if len(F) == 0:
        return SU11Pair.identity()
    s, e = F.start, F.stop - 1
    L = e - s + 1
    A = np.zeros(L, dtype=complex)  # exponents s-e .. 0
    B = np.zeros(L, dtype=complex)  # exponents s .. e
    A[-1] = 1.0
    for n, f in zip(F.indices, F.values):
        if f == 0:
            continue
        c = 1.0 / np.sqrt(1.0 - abs(f) ** 2)
        k0 = e - n
        newA = A.copy()
        newA[k0:] += np.conj(f) * B[:L - k0]
        newB = B.copy()
        newB[:L - k0] += f * A[k0:]
        A = c * newA
        B = c * newB
    return SU11Pair(LaurentPolynomial(s - e, A, tol=ROUNDING_TOL), LaurentPolynomial(s, B, tol=ROUNDING_TOL))


def quadrature_grid_size(F: CoefficientSequence, minimum: int = 4096,
                         p: Optional[SU11Pair] = None) -> int:
    """Grid size for integrals of ``log|a|``.

    ``max(minimum, 8 * band, 40 / delta)`` rounded up to a power of two,
    where ``delta`` is the distance from the circle to the nearest zero of
    ``a``.  ``log|a|`` has Fourier coefficients decaying like
    ``(1 - delta)^k``, so the trapezoid error behaves like ``exp(-M delta)``.
    """
    band = max(len(F) - 1, 0)
    need = max(minimum, 8 * band)
    p = p or nlft_finite(F)
    # Trimming at the degree-detection tolerance only drops zeros near z = 0.
    a = LaurentPolynomial(p.a.lo, p.a.coeffs)
    if a.lo < 0:
        # a is a polynomial in 1/z; its zeros are the reciprocals of the roots in w = 1/z.
        w_roots = roots(a.coeffs[::-1])
        if w_roots.size:
            delta = max(1.0 - 1.0 / float(np.min(np.abs(w_roots))), 1e-300)
            need = max(need, PEAK_RESOLUTION / delta)
    return next_power_of_two(int(min(need, MAX_QUADRATURE_GRID)))


# -- symmetries -------------------------------------------------------------

def apply_symmetry(p: SU11Pair, which: str, c: Optional[complex] = None) -> SU11Pair:
    """Act on a transform by one of the four sequence symmetries.

    ``shift``       F_n -> F_{n+1}      gives (a, b z^-1)
    ``modulate``    F_n -> c F_n        gives (a, c b), |c| = 1
    ``reflect``     F_n -> F_{-n}       gives (a*(1/z), b(1/z))
    ``conjugate``   F_n -> conj(F_n)    gives (a*(1/z), b*(1/z))
    """
    a, b = p.a, p.b
    if which == "shift":
        if p.kind == "grid":
            z = UnitCircleGrid.nodes(b.M)
            return SU11Pair(a, UnitCircleGrid(b.M, b.samples / z), p.a_infinity)
        return SU11Pair(a, b.shift(-1))
    if which == "modulate":
        if c is None or abs(abs(complex(c)) - 1) > 1e-12:
            raise NonUnimodularModulation(f"modulation constant {c} is not of modulus one")
        if p.kind == "grid":
            return SU11Pair(a, UnitCircleGrid(b.M, complex(c) * b.samples), p.a_infinity)
        return SU11Pair(a, b * complex(c))
    if which in ("reflect", "conjugate"):
        if p.kind == "grid":
            idx = (-np.arange(a.M)) % a.M
            new_a = UnitCircleGrid(a.M, np.conj(a.samples[idx]))
            bs = b.samples[idx]
            new_b = UnitCircleGrid(b.M, bs if which == "reflect" else np.conj(bs))
            return SU11Pair(new_a, new_b, p.a_infinity)
        new_b = b.reflect() if which == "reflect" else b.conjugate_coefficients()
        return SU11Pair(a.conjugate_coefficients(), new_b)
    raise InputError(f"unknown symmetry {which!r}")


def shift_sequence(F: CoefficientSequence) -> CoefficientSequence:
    """``G_n = F_{n+1}``."""
    return CoefficientSequence(F.start - 1, F.values)


def modulate_sequence(F: CoefficientSequence, c: complex) -> CoefficientSequence:
    return CoefficientSequence(F.start, complex(c) * F.values)


def reflect_sequence(F: CoefficientSequence) -> CoefficientSequence:
    """``G_n = F_{-n}``."""
    if len(F) == 0:
        return F
    return CoefficientSequence(-(F.stop - 1), F.values[::-1])


def conjugate_sequence(F: CoefficientSequence) -> CoefficientSequence:
    return CoefficientSequence(F.start, np.conj(F.values))


# -- multilinear expansion --------------------------------------------------

def _multilinear_sums(F: CoefficientSequence, max_order: int) -> list[LaurentPolynomial]:
    # sums[k] collects d_1 d_2* d_3 d_4* ... over increasing index tuples of length k,
    # built one index at a time (highest k first so each index is used once).
    sums = [LaurentPolynomial.constant(1.0)] + [LaurentPolynomial.zero()] * max_order
    for n, f in zip(F.indices, F.values):
        if f == 0:
            continue
        d = LaurentPolynomial.monomial(f, int(n))
        d_star = d.star()
        for k in range(max_order, 0, -1):
            if sums[k - 1].is_zero():
                continue
            factor = d if k % 2 == 1 else d_star
            sums[k] = sums[k] + sums[k - 1] * factor
    return sums


def multilinear_term(F: CoefficientSequence, n: int) -> SU11Pair:
    """The order-``n`` term of the expansion of the transform (without the scalar prefactor).

    Even orders land in the ``a`` slot and odd orders in the ``b`` slot.
    """
    if n < 0:
        raise InputError("order must be nonnegative")
    term = _multilinear_sums(F, n)[n]
    if n % 2 == 0:
        return SU11Pair(term, LaurentPolynomial.zero())
    return SU11Pair(LaurentPolynomial.zero(), term)


@dataclass(frozen=True)
class ExpansionResult:
    pair: SU11Pair
    max_deviation: float
    grid_size: int


def expansion_partial_sum(F: CoefficientSequence, n_terms: int, M: Optional[int] = None) -> ExpansionResult:
    """Scaled sum of the multilinear terms of order ``0 .. n_terms``.

    The report holds the largest grid deviation from :func:`nlft_finite`
    over both entries of the pair.
    """
    sums = _multilinear_sums(F, n_terms)
    scale = float(np.prod(1.0 / np.sqrt(1.0 - np.abs(F.values) ** 2))) if len(F) else 1.0
    a = LaurentPolynomial.zero()
    b = LaurentPolynomial.zero()
    for k, term in enumerate(sums):
        if k % 2 == 0:
            a = a + term
        else:
            b = b + term
    pair = SU11Pair(a * scale, b * scale)
    M = M or max(64, next_power_of_two(4 * (len(F) + 1)))
    exact = nlft_finite(F)
    ea, eb = exact.samples(M)
    pa, pb = pair.samples(M)
    dev = float(max(np.max(np.abs(ea - pa)), np.max(np.abs(eb - pb))))
    return ExpansionResult(pair, dev, M)


def expansion_tail_bound(F: CoefficientSequence, n_terms: int) -> float:
    """Crude bound on the omitted terms: term counting times the largest modulus."""
    L = len(F)
    if L == 0:
        return 0.0
    fmax = float(np.max(np.abs(F.values)))
    scale = float(np.prod(1.0 / np.sqrt(1.0 - np.abs(F.values) ** 2)))
    return scale * sum(comb(L, k) * fmax ** k for k in range(n_terms + 1, L + 1))


# -- identities -------------------------------------------------------------

def _log_modulus_a(F: CoefficientSequence, M: Optional[int]) -> tuple[np.ndarray, int]:
    M = M or quadrature_grid_size(F)
    a = sample(nlft_finite(F).a, M).samples
    return np.log(np.abs(a)), M


def plancherel_check(F: CoefficientSequence, M: Optional[int] = None) -> tuple[float, float]:
    """``(int log|a|, -1/2 sum log(1 - |F_n|^2))``."""
    if len(F) == 0:
        return 0.0, 0.0
    loga, _ = _log_modulus_a(F, M)
    rhs = -0.5 * float(np.sum(np.log1p(-np.abs(F.values) ** 2)))
    return float(np.mean(loga)), rhs


@dataclass(frozen=True)
class SumRules:
    k1_lhs: complex
    k1_rhs: complex
    k2_lhs: complex
    k2_rhs: complex

    def max_deviation(self) -> float:
        return float(max(abs(self.k1_lhs - self.k1_rhs), abs(self.k2_lhs - self.k2_rhs)))


def sum_rules(F: CoefficientSequence, M: Optional[int] = None) -> SumRules:
    """First two moment identities of ``log|a|``.

    k = 1:  2 int z^-1 log|a| = sum conj(F_n) F_{n+1}
    k = 2:  4 int z^-2 log|a| = -sum (conj(F_n) F_{n+1})^2
                                + 2 sum conj(F_n) (1 - |F_{n+1}|^2) F_{n+2}
    """
    if len(F) == 0:
        return SumRules(0j, 0j, 0j, 0j)
    loga, M = _log_modulus_a(F, M)
    z = UnitCircleGrid.nodes(M)
    k1_lhs = 2 * np.mean(loga / z)
    k2_lhs = 4 * np.mean(loga / z ** 2)
    f = np.concatenate([F.values, [0, 0]])
    pairs = np.conj(f[:-1]) * f[1:]
    k1_rhs = np.sum(pairs)
    k2_rhs = -np.sum(pairs ** 2) + 2 * np.sum(np.conj(f[:-2]) * (1 - np.abs(f[1:-1]) ** 2) * f[2:])
    return SumRules(complex(k1_lhs), complex(k1_rhs), complex(k2_lhs), complex(k2_rhs))


def sup_log_estimate(F: CoefficientSequence, M: Optional[int] = None) -> tuple[float, float]:
    """``(sup (log|a|)^(1/2), sum (log (1-|F_n|^2)^(-1/2))^(1/2))``; the first never exceeds the second."""
    if len(F) == 0:
        return 0.0, 0.0
    M = M or quadrature_grid_size(F)
    # |a|^2 = 1 + |b|^2 on the circle; log1p keeps small data accurate.
    b = sample(nlft_finite(F).b, M).samples
    lhs = float(np.sqrt(0.5 * np.max(np.log1p(np.abs(b) ** 2))))
    rhs = float(np.sum(np.sqrt(-0.5 * np.log1p(-np.abs(F.values) ** 2))))
    return lhs, rhs


def degree_law_report(F: CoefficientSequence, p: Optional[SU11Pair] = None) -> dict:
    """Exponent bands of the transform versus the support window of ``F``."""
    p = p or nlft_finite(F)
    window = F.support()
    if window is None:
        return {"b_band_ok": p.b.is_zero(), "a_band_ok": p.a.hi <= 0 and p.a.lo == 0,
                "a0_deviation": abs(p.a.coefficient(0) - 1.0)}
    lo, hi = window
    expected_a0 = float(np.prod(1.0 / np.sqrt(1.0 - np.abs(F.values) ** 2)))
    return {
        "b_band_ok": (p.b.lo, p.b.hi) == (lo, hi),
        "a_band_ok": p.a.hi == 0 and p.a.lo == lo - hi,
        "a0_deviation": abs(p.a.coefficient(0) - expected_a0),
    }


# -- truncation of infinite sequences ----------------------------------------

@dataclass(frozen=True)
class TruncatedTransform:
    pair: SU11Pair
    tail_bound: float
    tail_energy: float


SequenceLike = Union[CoefficientSequence, Callable[[int], complex]]


def nlft_truncated(F: SequenceLike, N: int, tail_energy: Optional[float] = None,
                   horizon: int = 1 << 16) -> TruncatedTransform:
    """Transform of ``F`` restricted to ``[-N, N]`` with a certificate for the omitted tail.

    ``tail_energy`` is ``sum_{|n| > N} |log(1 - |F_n|^2)|``.  When it is not
    supplied it is summed from the stored entries, or, for a callable ``F``,
    over ``N < |n| <= horizon``.  The bound is ``8 * sqrt(tail_energy / 2)``.
    """
    if isinstance(F, CoefficientSequence):
        window = F.restrict(-N, N)
        if tail_energy is None:
            outside = [F[n] for n in F.indices if abs(n) > N]
            tail_energy = float(np.sum(-np.log1p(-np.abs(np.asarray(outside, dtype=complex)) ** 2)))
    else:
        window = CoefficientSequence(-N, [F(n) for n in range(-N, N + 1)])
        if tail_energy is None:
            ns = np.arange(N + 1, horizon + 1)
            vals = np.concatenate([np.vectorize(F, otypes=[complex])(ns),
                                   np.vectorize(F, otypes=[complex])(-ns)])
            tail_energy = float(np.sum(-np.log1p(-np.abs(vals) ** 2)))
    eps = 0.5 * tail_energy
    return TruncatedTransform(nlft_finite(window), TAIL_CONSTANT * float(np.sqrt(eps)), float(tail_energy))
