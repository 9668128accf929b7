"""Inverse transform: layer stripping, the Schur algorithm and full-line inversion.

A pair ``(a, b)`` in H (sequence supported on ``n >= 0``) is encoded by the
Schur function ``r = b / a*``, holomorphic in D with ``|r| <= 1``.  One Schur
step reads ``F = r(0)`` and replaces ``r`` by ``(r - F) / (z (1 - conj(F) r))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np
import scipy.linalg

from .errors import (
    InputError,
    ModulusReachedOne,
    NotInH,
    NotInImage,
    PeelDivergence,
    RepresentationMismatch,
    TruncationExhausted,
)
from .laurent_core import RationalFunction
from .riemann_hilbert import RHFactorization, triple_factorization_rational
from .spectral_factorization import pair_from_schur
from .su11_pairs import SEQUENCE_MODULUS_LIMIT, CoefficientSequence, SU11Pair, pair_product

MODULUS_GUARD = 1 - 1e-12
ENERGY_GRID = 4096


# ---------------------------------------------------------------------------
# exact complex rationals


@dataclass(frozen=True)
class GaussianRational:
    """Complex number with rational real and imaginary parts."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        return cls(Fraction(value))

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussianRational.coerce(other))

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        d = o.abs2()
        if d == 0:
            raise ZeroDivisionError("division by zero")
        return self * GaussianRational(o.re / d, -o.im / d)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return f"{self.re}"
        return f"({self.re} + {self.im}i)"


def _trim_exact(coeffs: list) -> list:
    out = list(coeffs)
    while len(out) > 1 and out[-1].is_zero():
        out.pop()
    return out


def schur_algorithm_exact(num, den, N: int) -> list[GaussianRational]:
    """``N`` Schur parameters of ``num(z) / den(z)`` in exact rational arithmetic.

    Coefficients are ascending and may be ints, Fractions, complex numbers
    with rational parts or :class:`GaussianRational`.  Each step divides the
    numerator by ``z`` exactly, since its constant term vanishes identically.
    """
    p = _trim_exact([GaussianRational.coerce(c) for c in num])
    q = _trim_exact([GaussianRational.coerce(c) for c in den])
    if q[0].is_zero():
        raise NotInH("denominator vanishes at 0")
    out = []
    for k in range(N):
        lead = q[0]
        p = [c / lead for c in p]
        q = [c / lead for c in q]
        F = p[0]
        if F.abs2() >= 1:
            raise ModulusReachedOne(f"|F_{k}|^2 = {F.abs2()} is not below 1")
        out.append(F)
        width = max(len(p), len(q))
        p = p + [GaussianRational(0)] * (width - len(p))
        q = q + [GaussianRational(0)] * (width - len(q))
        Fc = F.conjugate()
        new_p = [p[i] - F * q[i] for i in range(width)]
        new_q = [q[i] - Fc * p[i] for i in range(width)]
        if not new_p[0].is_zero():
            raise ArithmeticError("constant term failed to cancel")
        p = _trim_exact(new_p[1:] or [GaussianRational(0)])
        q = _trim_exact(new_q)
        if q[0].is_zero():
            raise ModulusReachedOne(f"Schur function became unimodular after step {k}")
    return out


# ---------------------------------------------------------------------------
# Schur functions


@dataclass(frozen=True, eq=False)
class SchurFunction:
    """A function holomorphic in D and bounded by 1, either rational or as Taylor coefficients.

    ``reliable`` counts the Taylor coefficients that are trustworthy; each
    Schur step consumes one.
    """

    rational: Optional[RationalFunction] = None
    taylor: Optional[np.ndarray] = None
    reliable: int = 0

    @classmethod
    def from_rational(cls, r: RationalFunction, check: bool = True) -> "SchurFunction":
        if check:
            _check_schur_rational(r)
        return cls(rational=r)

    @classmethod
    def from_taylor(cls, coeffs, reliable: Optional[int] = None) -> "SchurFunction":
        arr = np.array(coeffs, dtype=complex).reshape(-1)
        return cls(taylor=arr, reliable=arr.size if reliable is None else int(reliable))

    @property
    def kind(self) -> str:
        return "rational" if self.rational is not None else "taylor"

    def value_at_zero(self) -> complex:
        if self.rational is not None:
            return self.rational.value_at_zero()
        return complex(self.taylor[0]) if self.taylor.size else 0j

    def __call__(self, z):
        if self.rational is not None:
            return self.rational(z)
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.taylor)

    def to_json(self) -> dict:
        if self.rational is not None:
            return {"kind": "rational", "function": self.rational.to_json()}
        return {"kind": "taylor", "reliable": self.reliable,
                "coeffs": [[c.real, c.imag] for c in self.taylor]}


def _check_schur_rational(r: RationalFunction) -> None:
    r = r.reduced() if r.den_degree else r
    for p, _ in (r.poles() if r.den_degree else []):
        if abs(p) <= 1 + 1e-9:
            raise NotInH(f"pole {p:.12g} lies in the closed disc")
    z = np.exp(2j * np.pi * (np.arange(1024) + 0.5) / 1024)
    top = float(np.max(np.abs(r(z))))
    if top > 1 + 1e-9:
        raise NotInH(f"sup |r| = {top:.12g} exceeds 1")


def _schur_step_rational(r: RationalFunction, F: complex) -> RationalFunction:
    width = max(r.num.size, r.den.size)
    n = np.pad(np.asarray(r.num), (0, width - r.num.size))
    d = np.pad(np.asarray(r.den), (0, width - r.den.size))
    num = n - F * d
    den = d - np.conj(F) * n
    num = num[1:] if num.size > 1 else np.zeros(1, dtype=complex)
    if not np.any(np.abs(num) > 1e-15 * max(1.0, np.max(np.abs(den)))):
        num = np.zeros(1, dtype=complex)
    return RationalFunction(num, den)


def _series_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Taylor coefficients of ``num / den`` to the length of ``num``."""
    K = num.size
    col = np.zeros(K, dtype=complex)
    col[:min(K, den.size)] = den[:K]
    T = scipy.linalg.toeplitz(col, np.zeros(K, dtype=complex))
    return scipy.linalg.solve_triangular(T, num, lower=True)


def schur_log_energy(r: RationalFunction, M: int = ENERGY_GRID) -> float:
    """``int |log(1 - |r|^2)|`` over the circle, on the half-shifted grid.

    The half shift keeps nodes off points where ``|r| = 1``.
    """
    z = np.exp(2j * np.pi * (np.arange(M) + 0.5) / M)
    mod2 = np.abs(r(z)) ** 2
    return float(np.mean(-np.log1p(-np.minimum(mod2, 1 - 1e-300))))


@dataclass(frozen=True, eq=False)
class SchurResult:
    """Schur parameters, the remaining Schur function and the energy ledger.

    ``energies[k]`` is ``int |log(1 - |r_k|^2)|`` for the ``k``-th iterate
    (rational input only).
    """

    sequence: CoefficientSequence
    remainder: SchurFunction
    energies: Optional[np.ndarray] = None

    def ledger_defects(self) -> np.ndarray:
        """``energies[k] - energies[k+1] - |log(1 - |F_k|^2)|`` for each step."""
        if self.energies is None:
            raise InputError("no energy ledger for Taylor input")
        F = self.sequence.values
        return self.energies[:-1] - self.energies[1:] + np.log1p(-np.abs(F) ** 2)


def schur_algorithm(r: Union[SchurFunction, RationalFunction], N: int,
                    energy_grid: Optional[int] = ENERGY_GRID) -> SchurResult:
    """First ``N`` Schur parameters of ``r``.

    Rational input runs the Mobius recursion on numerator and denominator
    coefficients and records the energy ledger (``energy_grid=None`` skips
    it).  Taylor input runs the same recursion on power series and loses one
    reliable coefficient per step.
    """
    if isinstance(r, RationalFunction):
        r = SchurFunction.from_rational(r)
    values = []
    if r.kind == "rational":
        f = r.rational
        energies = [schur_log_energy(f, energy_grid)] if energy_grid else None
        for k in range(N):
            F = f.value_at_zero()
            if abs(F) >= MODULUS_GUARD:
                raise ModulusReachedOne(f"|F_{k}| = {abs(F):.15g} reached 1")
            values.append(F)
            f = _schur_step_rational(f, F)
            if energies is not None:
                energies.append(schur_log_energy(f, energy_grid))
        return SchurResult(CoefficientSequence(0, values), SchurFunction(rational=f),
                           None if energies is None else np.array(energies))
    coeffs = np.array(r.taylor, dtype=complex)
    reliable = r.reliable
    for k in range(N):
        if reliable <= 0 or coeffs.size == 0:
            raise TruncationExhausted(f"Taylor data exhausted after {k} steps")
        F = complex(coeffs[0])
        if abs(F) >= MODULUS_GUARD:
            raise ModulusReachedOne(f"|F_{k}| = {abs(F):.15g} reached 1")
        values.append(F)
        num = coeffs.copy()
        num[0] = 0.0
        den = -np.conj(F) * coeffs
        den[0] += 1.0
        coeffs = _series_divide(num, den)[1:]
        reliable -= 1
    return SchurResult(CoefficientSequence(0, values), SchurFunction(taylor=coeffs, reliable=reliable))


# ---------------------------------------------------------------------------
# pairs and Schur functions


def reflection_quotient(p: SU11Pair, K: Optional[int] = None, tol: float = 1e-9) -> SchurFunction:
    """The Schur function ``b / a*`` of a pair in H.

    Raises :class:`NotInH` when ``b / a*`` has a pole in D (for grid pairs:
    when its negative Fourier modes exceed ``tol``).
    """
    if p.kind == "laurent":
        if p.b.is_zero():
            return SchurFunction(rational=RationalFunction([0.0], [1.0]))
        if p.b.lo < 0:
            raise NotInH(f"b has a pole of order {-p.b.lo} at 0")
        a_star = p.a.star()
        return SchurFunction(rational=RationalFunction(p.b.dense(0, p.b.hi), a_star.dense(0, a_star.hi)))
    if p.kind == "rational":
        r = (p.b / p.a.star())
        if r.is_zero():
            return SchurFunction(rational=RationalFunction([0.0], [1.0]))
        r = r.reduced()
        for q, _ in (r.poles() if r.den_degree else []):
            if abs(q) < 1 - 1e-9:
                raise NotInH(f"b/a* has a pole at {q:.12g} inside the disc")
            if abs(q) <= 1 + 1e-9:
                raise NotInH(f"b/a* has a pole at {q:.12g} on the circle")
        return SchurFunction(rational=r)
    a, b = p.samples(p.a.M)
    M = p.a.M
    spec = np.fft.fft(b / np.conj(a)) / M
    negative = spec[M // 2 + 1:]
    if np.max(np.abs(negative), initial=0.0) > tol:
        raise NotInH(f"b/a* has negative Fourier modes up to {np.max(np.abs(negative)):.3e}")
    K = M // 2 if K is None else min(K, M // 2)
    return SchurFunction.from_taylor(spec[:K])


def pair_from_schur_function(s: SchurFunction, shift: int = 0) -> SU11Pair:
    """The pair in H with Schur function ``s``, its sequence moved right by ``shift``."""
    if s.rational is None:
        raise RepresentationMismatch("closed-form pairs need a rational Schur function")
    a, b = pair_from_schur(s.rational)
    return SU11Pair(a, b.shift(shift))


# ---------------------------------------------------------------------------
# finite inversion


def layer_strip_finite(p: SU11Pair, tol: float = 1e-8) -> CoefficientSequence:
    """Recover the finite sequence of a Laurent pair by peeling one layer at a time.

    With ``b`` supported on ``[s, e]`` and ``a`` on ``[s - e, 0]``, the
    lowest layer is ``F_s = b_s / conj(a_0)``; multiplying by the inverse
    transfer matrix of ``F_s`` removes it.
    """
    if p.kind != "laurent":
        raise RepresentationMismatch("layer stripping needs a Laurent pair")
    a, b = p.a, p.b
    if b.is_zero():
        return CoefficientSequence(0, [])
    s, e = b.lo, b.hi
    if a.hi > 0 or a.lo < s - e:
        raise NotInImage(f"a has band [{a.lo}, {a.hi}], expected inside [{s - e}, 0]")
    a0 = a.coefficient(0)
    if abs(a0.imag) > tol * abs(a0) or a0.real <= 0:
        raise NotInImage(f"a(inf) = {a0} is not positive")
    z = np.exp(2j * np.pi * np.arange(1024) / 1024)
    defect = np.max(np.abs(np.abs(a(z)) ** 2 - np.abs(b(z)) ** 2 - 1))
    if defect > tol * max(1.0, np.max(np.abs(a(z))) ** 2):
        raise NotInImage(f"|a|^2 - |b|^2 deviates from 1 by {defect:.3e}")
    lo_a = s - e
    A = a.dense(lo_a, 0).astype(complex)
    B = b.dense(s, e).astype(complex)
    values = []
    for n in range(s, e + 1):
        a_top = A[-1]
        F = B[n - s] / np.conj(a_top)
        if not np.isfinite(F) or abs(F) >= SEQUENCE_MODULUS_LIMIT:
            raise PeelDivergence(f"|F_{n}| = {abs(F):.6g} during peeling")
        values.append(F)
        c = 1.0 / np.sqrt(1.0 - abs(F) ** 2)
        ka = np.arange(n - e, 1)          # exponents of z^n b* inside a's band
        kb = np.arange(n, e + 1)          # exponents of z^n a* inside b's band
        bstar = np.conj(B[(n - ka) - s])
        astar = np.conj(A[(n - kb) - lo_a])
        A_new = A.copy()
        B_new = B.copy()
        A_new[ka - lo_a] -= F * bstar
        B_new[kb - s] -= F * astar
        A, B = c * A_new, c * B_new
    return CoefficientSequence(s, values)


# ---------------------------------------------------------------------------
# full-line inversion


@dataclass(frozen=True, eq=False)
class FullLineInversion:
    """Recovered sequence on ``[-steps, steps - 1]`` with exact tail data.

    ``right_tail`` and ``left_tail`` are the Schur functions left after the
    right half and the reflected left half were processed; together with the
    sequence they reconstruct the pair exactly.
    """

    sequence: CoefficientSequence
    policy: str
    factorization: Optional[RHFactorization] = None
    right_tail: Optional[SchurFunction] = None
    left_tail: Optional[SchurFunction] = None
    steps: int = 0

    def tail_pairs(self) -> tuple[Optional[SU11Pair], Optional[SU11Pair]]:
        """Closed-form transforms of the sequence beyond the recovered window (left, right)."""
        left = right = None
        if self.right_tail is not None:
            right = pair_from_schur_function(self.right_tail, self.steps)
        if self.left_tail is not None:
            mirrored = pair_from_schur_function(self.left_tail, self.steps + 1)
            left = SU11Pair(mirrored.a.star().reflect(), mirrored.b.reflect())
        return left, right


POLICIES = ("min-right", "max-right")


def invert_full_line(p: SU11Pair, steps: int = 200, policy: str = "min-right") -> FullLineInversion:
    """Invert a pair on the whole line.

    Laurent pairs are inverted exactly by layer stripping.  Rational pairs
    are triple factored as ``X_-- X_o X_++``; the policy decides where the
    middle factor goes (``min-right``: left, ``max-right``: right).  The
    right factor is inverted by the Schur algorithm, the left factor by the
    Schur algorithm applied to its reflection.
    """
    if policy not in POLICIES:
        raise InputError(f"policy must be one of {POLICIES}, got {policy!r}")
    if p.kind == "laurent":
        return FullLineInversion(layer_strip_finite(p), policy)
    if p.kind != "rational":
        raise RepresentationMismatch("full-line inversion needs a Laurent or rational pair")
    f = triple_factorization_rational(p)
    if policy == "min-right":
        left, right = pair_product(f.left, f.middle), f.right
    else:
        left, right = f.left, pair_product(f.middle, f.right)
    right = SU11Pair(right.a.reduced(), right.b.reduced())
    left = SU11Pair(left.a.reduced(), left.b.reduced())
    right_run = schur_algorithm(reflection_quotient(right), steps, energy_grid=None)
    mirrored = SU11Pair(left.a.star().reflect(), left.b.reflect())
    left_run = schur_algorithm(reflection_quotient(mirrored), steps + 1, energy_grid=None)
    g = left_run.sequence.values
    values = list(g[:0:-1]) + list(right_run.sequence.values)
    values[steps] += g[0]
    seq = CoefficientSequence(-steps, values)
    return FullLineInversion(seq, policy, f, right_run.remainder, left_run.remainder, steps)


def evaluate_pair(p: SU11Pair, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values of a Laurent or rational pair at points of the circle."""
    if p.kind == "grid":
        raise RepresentationMismatch("grid pairs cannot be evaluated off their grid")
    return np.asarray(p.a(z)), np.asarray(p.b(z))


def product_values(*pairs_values) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise product of pairs given by their values on the circle."""
    a, b = pairs_values[0]
    for c, d in pairs_values[1:]:
        a, b = a * c + b * np.conj(d), a * d + b * np.conj(c)
    return a, b


def retransform_deviation(inv: FullLineInversion, p: SU11Pair, M: int = 1024,
                          with_tails: bool = True) -> float:
    """Relative deviation between ``p`` and the transform of the recovered sequence.

    With ``with_tails`` the transform of the recovered window is completed by
    the closed-form tail pairs, so only numerical error remains; without them
    the deviation measures the truncation.  Values are compared on the
    half-shifted circle grid, relative to ``|a| + |b|``.
    """
    from .forward_nlft import nlft_finite

    z = np.exp(2j * np.pi * (np.arange(M) + 0.5) / M)
    parts = [evaluate_pair(nlft_finite(inv.sequence), z)]
    if with_tails:
        left, right = inv.tail_pairs()
        if left is not None:
            parts.insert(0, evaluate_pair(left, z))
        if right is not None:
            parts.append(evaluate_pair(right, z))
    a1, b1 = product_values(*parts)
    a0, b0 = evaluate_pair(p, z)
    return float(np.max((np.abs(a1 - a0) + np.abs(b1 - b0)) / (np.abs(a0) + np.abs(b0))))


__all__ = [
    "GaussianRational", "schur_algorithm_exact", "SchurFunction", "SchurResult", "schur_algorithm",
    "schur_log_energy", "reflection_quotient", "pair_from_schur_function", "layer_strip_finite",
    "FullLineInversion", "invert_full_line", "retransform_deviation", "evaluate_pair",
    "product_values", "POLICIES",
]
