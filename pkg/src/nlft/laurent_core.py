"""Laurent polynomials, rational functions and equispaced circle grids.

Coefficient arrays are always stored in ascending order of powers.  A Laurent
polynomial carries the exponent of its first stored coefficient in ``lo``;
a rational function is a quotient of two ordinary polynomials in ``z``.

All values are immutable: the stored numpy arrays are flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import comb

from .errors import BandTooWide, DegenerateLeadingCoefficient, PoleOnGrid

TRIM_TOL = 1e-12
# Relative rounding level used when trimming results of arithmetic.
ROUNDING_TOL = 8 * np.finfo(float).eps
ROOT_TOL = 1e-9
POLE_CLEARANCE = 1e-8
# Computed roots of multiplicity m scatter by roughly eps**(1/m); clusters
# are gathered with this looser radius and then replaced by their mean.
CLUSTER_TOL = 1e-6

ArrayLike = Union[Sequence[complex], np.ndarray]


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=complex).reshape(-1)
    arr.setflags(write=False)
    return arr


def _trim_band(coeffs: np.ndarray, tol: float, scale: Optional[float] = None) -> tuple[int, np.ndarray]:
    """Drop leading and trailing coefficients below ``tol * scale``.

    ``scale`` defaults to the largest coefficient modulus.
    """
    if coeffs.size == 0:
        return 0, coeffs
    if scale is None:
        scale = np.max(np.abs(coeffs))
    if scale == 0.0 or not np.any(coeffs):
        return 0, coeffs[:0]
    keep = np.nonzero(np.abs(coeffs) > tol * scale)[0]
    if keep.size == 0:
        return 0, coeffs[:0]
    return int(keep[0]), coeffs[keep[0]:keep[-1] + 1]


def _trim_top(coeffs: np.ndarray, tol: float) -> np.ndarray:
    """Drop high-order coefficients below ``tol`` times the largest one."""
    if coeffs.size == 0:
        return coeffs
    scale = np.max(np.abs(coeffs))
    if scale == 0.0:
        return coeffs[:0]
    keep = np.nonzero(np.abs(coeffs) > tol * scale)[0]
    return coeffs[:keep[-1] + 1]


def chordal_distance(z: complex, w: complex) -> float:
    """Chordal distance on the Riemann sphere (finite arguments)."""
    return 2 * abs(z - w) / np.sqrt((1 + abs(z) ** 2) * (1 + abs(w) ** 2))


def next_power_of_two(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def grid_size_for(band: int, minimum: int = 4) -> int:
    """Smallest power of two that is at least ``4 * (band + 1)`` and ``minimum``."""
    return max(next_power_of_two(4 * (band + 1)), next_power_of_two(minimum))


@dataclass(frozen=True, eq=False)
class LaurentPolynomial:
    """Finite Laurent series ``sum_k coeffs[k] z**(lo + k)``.

    >>> p = LaurentPolynomial(-1, [2, 0, 1])
    >>> p.hi
    1
    >>> p.star().coeffs.tolist()
    [(1-0j), 0j, (2-0j)]
    """

    lo: int
    coeffs: np.ndarray

    def __init__(self, lo: int = 0, coeffs: ArrayLike = (), *, trim: bool = True,
                 tol: float = TRIM_TOL):
        arr = np.array(coeffs, dtype=complex).reshape(-1)
        lo = int(lo)
        if trim:
            offset, arr = _trim_band(arr, tol)
            lo += offset
        if arr.size == 0:
            lo = 0
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "coeffs", _frozen(arr))

    @classmethod
    def constant(cls, c: complex) -> "LaurentPolynomial":
        return cls(0, [c])

    @classmethod
    def monomial(cls, c: complex, k: int) -> "LaurentPolynomial":
        return cls(k, [c])

    @classmethod
    def zero(cls) -> "LaurentPolynomial":
        return cls(0, [])

    @property
    def hi(self) -> int:
        """Upper degree (highest exponent present)."""
        return self.lo + len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    @property
    def band(self) -> int:
        return max(0, len(self.coeffs) - 1)

    def coefficient(self, k: int) -> complex:
        idx = k - self.lo
        if 0 <= idx < len(self.coeffs):
            return complex(self.coeffs[idx])
        return 0j

    def dense(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients of ``z**lo .. z**hi`` as a fresh array."""
        out = np.zeros(hi - lo + 1, dtype=complex)
        if self.is_zero():
            return out
        s = max(lo, self.lo)
        e = min(hi, self.hi)
        if s <= e:
            out[s - lo:e - lo + 1] = self.coeffs[s - self.lo:e - self.lo + 1]
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.is_zero():
            return np.zeros_like(z)
        return npoly.polyval(z, self.coeffs) * z ** self.lo

    def value_at_infinity(self) -> complex:
        if not self.is_zero() and self.hi > 0:
            return complex(np.inf)
        return self.coefficient(0)

    def value_at_zero(self) -> complex:
        if not self.is_zero() and self.lo < 0:
            return complex(np.inf)
        return self.coefficient(0)

    def star(self) -> "LaurentPolynomial":
        """Conjugate-reflect: the coefficient of z^-k becomes conj of that of z^k."""
        if self.is_zero():
            return self
        return LaurentPolynomial(-self.hi, np.conj(self.coeffs[::-1]), trim=False)

    def reflect(self) -> "LaurentPolynomial":
        """Substitute ``1/z`` for ``z``."""
        if self.is_zero():
            return self
        return LaurentPolynomial(-self.hi, self.coeffs[::-1], trim=False)

    def conjugate_coefficients(self) -> "LaurentPolynomial":
        return LaurentPolynomial(self.lo, np.conj(self.coeffs), trim=False)

    def shift(self, k: int) -> "LaurentPolynomial":
        """Multiply by ``z**k``."""
        if self.is_zero():
            return self
        return LaurentPolynomial(self.lo + k, self.coeffs, trim=False)

    def __neg__(self) -> "LaurentPolynomial":
        return LaurentPolynomial(self.lo, -self.coeffs, trim=False)

    def __add__(self, other) -> "LaurentPolynomial":
        if not isinstance(other, LaurentPolynomial):
            other = LaurentPolynomial.constant(complex(other))
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other) -> "LaurentPolynomial":
        if not isinstance(other, LaurentPolynomial):
            other = LaurentPolynomial.constant(complex(other))
        return add(self, -other)

    def __rsub__(self, other) -> "LaurentPolynomial":
        return (-self) + other

    def __mul__(self, other) -> "LaurentPolynomial":
        if isinstance(other, LaurentPolynomial):
            return multiply(self, other)
        if isinstance(other, RationalFunction):
            return NotImplemented
        if complex(other) == 0:
            return LaurentPolynomial.zero()
        return LaurentPolynomial(self.lo, self.coeffs * complex(other), trim=False)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "LaurentPolynomial":
        return LaurentPolynomial(self.lo, self.coeffs / complex(c), trim=False)

    def allclose(self, other: "LaurentPolynomial", tol: float = 1e-12) -> bool:
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        return bool(np.all(np.abs(self.dense(lo, hi) - other.dense(lo, hi)) <= tol))

    def to_rational(self) -> "RationalFunction":
        if self.is_zero():
            return RationalFunction([0], [1])
        if self.lo >= 0:
            return RationalFunction(np.concatenate([np.zeros(self.lo), self.coeffs]), [1])
        den = np.zeros(-self.lo + 1, dtype=complex)
        den[-1] = 1
        return RationalFunction(self.coeffs, den)

    def to_json(self) -> dict:
        return {"lo": self.lo, "coeffs": [[c.real, c.imag] for c in self.coeffs]}

    @classmethod
    def from_json(cls, data: dict) -> "LaurentPolynomial":
        coeffs = [complex(re, im) for re, im in data["coeffs"]]
        return cls(int(data["lo"]), coeffs)

    def __repr__(self) -> str:
        terms = ", ".join(f"{c:.6g}*z^{self.lo + k}" for k, c in enumerate(self.coeffs))
        return f"LaurentPolynomial({terms or '0'})"


def star(p: LaurentPolynomial) -> LaurentPolynomial:
    return p.star()


def multiply(p: LaurentPolynomial, q: LaurentPolynomial) -> LaurentPolynomial:
    if p.is_zero() or q.is_zero():
        return LaurentPolynomial.zero()
    # Trim only at the rounding level of the inputs; genuine small end terms survive.
    coeffs = np.convolve(p.coeffs, q.coeffs)
    scale = float(np.max(np.abs(p.coeffs)) * np.max(np.abs(q.coeffs)))
    offset, coeffs = _trim_band(coeffs, ROUNDING_TOL * min(p.coeffs.size, q.coeffs.size), scale)
    return LaurentPolynomial(p.lo + q.lo + offset, coeffs, trim=False)


def add(p: LaurentPolynomial, q: LaurentPolynomial) -> LaurentPolynomial:
    if p.is_zero():
        return q
    if q.is_zero():
        return p
    lo = min(p.lo, q.lo)
    hi = max(p.hi, q.hi)
    scale = float(max(np.max(np.abs(p.coeffs)), np.max(np.abs(q.coeffs))))
    offset, coeffs = _trim_band(p.dense(lo, hi) + q.dense(lo, hi), ROUNDING_TOL, scale)
    return LaurentPolynomial(lo + offset, coeffs, trim=False)


def roots(poly: ArrayLike, tol: float = TRIM_TOL) -> np.ndarray:
    """All roots (with multiplicity) of an ascending-coefficient polynomial.

    Companion-matrix eigenvalues.  No per-root polishing: that would break the
    symmetry of a multiple root, whose cluster mean is otherwise accurate.
    """
    coeffs = np.asarray(poly, dtype=complex).reshape(-1)
    if coeffs.size == 0 or not np.any(coeffs):
        raise DegenerateLeadingCoefficient("the zero polynomial has no well-defined roots")
    scale = np.max(np.abs(coeffs))
    if abs(coeffs[-1]) <= tol * scale:
        raise DegenerateLeadingCoefficient(
            f"leading coefficient {abs(coeffs[-1]):.3e} is below the trim tolerance")
    if coeffs.size == 1:
        return np.zeros(0, dtype=complex)
    return npoly.polyroots(coeffs).astype(complex)


def _taylor_at(poly: np.ndarray, c: complex, count: int) -> np.ndarray:
    """First ``count`` Taylor coefficients of ``poly`` at ``c`` by repeated synthetic division."""
    work = np.array(poly, dtype=complex)[::-1]
    out = []
    for _ in range(count):
        acc = np.empty_like(work)
        acc[0] = work[0]
        for i in range(1, work.size):
            acc[i] = acc[i - 1] * c + work[i]
        out.append(acc[-1])
        work = acc[:-1]
        if work.size == 0:
            break
    return np.array(out + [0j] * (count - len(out)))


def _is_multiple_root(poly: np.ndarray, c: complex, m: int, slack: float = 50.0) -> bool:
    """Whether the Taylor coefficients of orders ``0 .. m-1`` at ``c`` are at rounding level."""
    coeffs = np.abs(np.asarray(poly, dtype=complex))
    t = np.abs(_taylor_at(poly, c, m))
    k = np.arange(coeffs.size)
    eps = np.finfo(float).eps
    for j in range(m):
        noise = eps * np.sum(coeffs[j:] * comb(k[j:], j) * abs(c) ** (k[j:] - j) * (k[j:] + 1))
        if t[j] > slack * noise:
            return False
    return True


def cluster_roots(values: Iterable[complex], tol: float = CLUSTER_TOL,
                  poly: Optional[ArrayLike] = None) -> list[tuple[complex, int]]:
    """Group nearby roots; returns (mean location, multiplicity) pairs.

    Roots within ``tol`` of each other always form one group.  With the
    polynomial supplied, a wider set of ``m`` roots (up to 1e-2 across)
    also counts as one ``m``-fold root when the polynomial's Taylor
    coefficients of orders below ``m`` at their mean are at rounding level:
    a perturbed multiple root scatters by about ``eps**(1/m)``, well beyond
    ``tol``.  Larger groups are preferred.
    """
    remaining = [complex(v) for v in values]
    clusters: list[tuple[complex, int]] = []
    while remaining:
        best = None
        for seed in remaining:
            ordered = sorted(remaining, key=lambda v: abs(v - seed))
            for m in range(len(ordered), 0, -1):
                if best is not None and m <= len(best):
                    break
                cand = ordered[:m]
                centre = complex(np.mean(cand))
                spread = max(abs(v - centre) for v in cand) / max(1.0, abs(centre))
                if m == 1 or spread <= tol:
                    ok = True
                elif poly is not None and spread <= 1e-2:
                    ok = _is_multiple_root(np.asarray(poly), centre, m)
                else:
                    ok = False
                if ok:
                    best = cand
                    break
        for v in best:
            remaining.remove(v)
        clusters.append((complex(np.mean(best)), len(best)))
    return clusters


def _polyval(coeffs: np.ndarray, z):
    return npoly.polyval(np.asarray(z, dtype=complex), coeffs)


@dataclass(frozen=True, eq=False)
class RationalFunction:
    """Quotient ``num(z) / den(z)`` of polynomials with ascending coefficients.

    The denominator is scaled to be monic.  Reduction (cancelling common roots)
    is done on request by :meth:`reduced`, not at construction.
    """

    num: np.ndarray
    den: np.ndarray

    def __init__(self, num: ArrayLike, den: ArrayLike = (1,), *, tol: float = TRIM_TOL):
        n = _trim_top(np.array(num, dtype=complex).reshape(-1), tol)
        d = _trim_top(np.array(den, dtype=complex).reshape(-1), tol)
        if d.size == 0:
            raise DegenerateLeadingCoefficient("denominator is the zero polynomial")
        lead = d[-1]
        n = n / lead if n.size else np.zeros(1, dtype=complex)
        d = d / lead
        object.__setattr__(self, "num", _frozen(n))
        object.__setattr__(self, "den", _frozen(d))

    @classmethod
    def constant(cls, c: complex) -> "RationalFunction":
        return cls([c], [1])

    @classmethod
    def from_roots(cls, gain: complex, zeros: Iterable[complex] = (),
                   poles: Iterable[complex] = ()) -> "RationalFunction":
        zeros = list(zeros)
        poles = list(poles)
        num = npoly.polyfromroots(zeros) if zeros else np.ones(1)
        den = npoly.polyfromroots(poles) if poles else np.ones(1)
        return cls(gain * np.asarray(num, dtype=complex), den)

    @property
    def num_degree(self) -> int:
        return -1 if self.is_zero() else len(self.num) - 1

    @property
    def den_degree(self) -> int:
        return len(self.den) - 1

    def is_zero(self) -> bool:
        return not np.any(self.num)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return _polyval(self.num, z) / _polyval(self.den, z)

    def value_at_infinity(self) -> complex:
        if self.is_zero():
            return 0j
        dn, dd = self.num_degree, self.den_degree
        if dn < dd:
            return 0j
        if dn > dd:
            return complex(np.inf)
        return complex(self.num[-1] / self.den[-1])

    def value_at_zero(self) -> complex:
        return complex(self(0.0))

    def _reverse_parts(self, conjugate: bool) -> "RationalFunction":
        # f(1/z) = z^(dD - dN) * rev(num) / rev(den); conjugating coefficients gives f*.
        num = self.num[::-1]
        den = self.den[::-1]
        if conjugate:
            num = np.conj(num)
            den = np.conj(den)
        if self.is_zero():
            return RationalFunction([0], [1])
        shift = self.den_degree - self.num_degree
        if shift >= 0:
            num = np.concatenate([np.zeros(shift), num])
        else:
            den = np.concatenate([np.zeros(-shift), den])
        return RationalFunction(num, den)

    def star(self) -> "RationalFunction":
        """``conj(f(1/conj(z)))``; equals complex conjugation on the unit circle."""
        return self._reverse_parts(conjugate=True)

    def reflect(self) -> "RationalFunction":
        """Substitute ``1/z`` for ``z``."""
        return self._reverse_parts(conjugate=False)

    def conjugate_coefficients(self) -> "RationalFunction":
        return RationalFunction(np.conj(self.num), np.conj(self.den))

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, LaurentPolynomial):
            return other.to_rational()
        return RationalFunction.constant(complex(other))

    def __add__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if np.array_equal(self.den, other.den):
            return RationalFunction(npoly.polyadd(self.num, other.num), self.den)
        num = npoly.polyadd(npoly.polymul(self.num, other.den), npoly.polymul(other.num, self.den))
        return RationalFunction(num, npoly.polymul(self.den, other.den))

    __radd__ = __add__

    def __sub__(self, other) -> "RationalFunction":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RationalFunction":
        return (-self) + other

    def __mul__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        return RationalFunction(npoly.polymul(self.num, other.num), npoly.polymul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        return RationalFunction(npoly.polymul(self.num, other.den), npoly.polymul(self.den, other.num))

    def shift(self, k: int) -> "RationalFunction":
        """Multiply by ``z**k``."""
        if k >= 0:
            return RationalFunction(np.concatenate([np.zeros(k), self.num]), self.den)
        return RationalFunction(self.num, np.concatenate([np.zeros(-k), self.den]))

    def zeros(self) -> list[tuple[complex, int]]:
        if self.is_zero() or self.num_degree == 0:
            return []
        return cluster_roots(roots(self.num), poly=self.num)

    def poles(self) -> list[tuple[complex, int]]:
        if self.den_degree == 0:
            return []
        return cluster_roots(roots(self.den), poly=self.den)

    def order_at_infinity(self) -> int:
        """Pole order at infinity (negative for a zero there)."""
        return self.num_degree - self.den_degree

    def reduced(self, tol: float = CLUSTER_TOL) -> "RationalFunction":
        """Cancel numerator and denominator roots that coincide within ``tol``."""
        if self.is_zero():
            return RationalFunction([0], [1])
        zs = [r for r, m in self.zeros() for _ in range(m)]
        ps = [r for r, m in self.poles() for _ in range(m)]
        kept_z = []
        for r in zs:
            match = next((i for i, p in enumerate(ps) if abs(p - r) <= tol * max(1.0, abs(r))), None)
            if match is None:
                kept_z.append(r)
            else:
                ps.pop(match)
        gain = self.num[-1] / self.den[-1]
        return RationalFunction.from_roots(gain, kept_z, ps)

    def pole_order(self, point: complex, tol: float = CLUSTER_TOL) -> int:
        """Pole order at a finite point (negative for a zero), after reduction."""
        order = 0
        for r, m in self.poles():
            if abs(r - point) <= tol * max(1.0, abs(point)):
                order += m
        for r, m in self.zeros():
            if abs(r - point) <= tol * max(1.0, abs(point)):
                order -= m
        return order

    def to_json(self) -> dict:
        return {"num": LaurentPolynomial(0, self.num, trim=False).to_json(),
                "den": LaurentPolynomial(0, self.den, trim=False).to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "RationalFunction":
        num = LaurentPolynomial.from_json(data["num"])
        den = LaurentPolynomial.from_json(data["den"])
        return laurent_ratio(num, den)

    def __repr__(self) -> str:
        return f"RationalFunction(num={np.round(self.num, 8).tolist()}, den={np.round(self.den, 8).tolist()})"


def laurent_ratio(num: LaurentPolynomial, den: LaurentPolynomial) -> RationalFunction:
    """Quotient of two Laurent polynomials as an ordinary rational function."""
    if den.is_zero():
        raise DegenerateLeadingCoefficient("denominator is the zero polynomial")
    if num.is_zero():
        return RationalFunction([0], [1])
    shift = num.lo - den.lo
    n = num.coeffs
    d = den.coeffs
    if shift >= 0:
        n = np.concatenate([np.zeros(shift), n])
    else:
        d = np.concatenate([np.zeros(-shift), d])
    return RationalFunction(n, d)


@dataclass(frozen=True, eq=False)
class UnitCircleGrid:
    """Samples ``f(exp(2 pi i j / M))`` for ``j = 0 .. M-1``."""

    M: int
    samples: np.ndarray

    def __init__(self, M: int, samples: ArrayLike):
        M = int(M)
        arr = np.array(samples, dtype=complex).reshape(-1)
        if M <= 0 or M & (M - 1):
            raise ValueError(f"grid size must be a positive power of two, got {M}")
        if arr.size != M:
            raise ValueError(f"expected {M} samples, got {arr.size}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "samples", _frozen(arr))

    @staticmethod
    def nodes(M: int) -> np.ndarray:
        return np.exp(2j * np.pi * np.arange(M) / M)

    def mean(self) -> complex:
        """Trapezoid quadrature of the normalized circle integral."""
        return complex(np.mean(self.samples))

    def fourier(self) -> np.ndarray:
        """Discrete Fourier coefficients; entry ``k`` holds the coefficient of z^k (mod M)."""
        return np.fft.fft(self.samples) / self.M

    def to_json(self) -> dict:
        return {"M": self.M, "samples": [[c.real, c.imag] for c in self.samples]}

    @classmethod
    def from_json(cls, data: dict) -> "UnitCircleGrid":
        return cls(int(data["M"]), [complex(re, im) for re, im in data["samples"]])


def sample(f: Union[LaurentPolynomial, RationalFunction, complex], M: int) -> UnitCircleGrid:
    """Evaluate ``f`` on the ``M`` equispaced nodes of the unit circle."""
    if isinstance(f, LaurentPolynomial):
        if f.is_zero():
            return UnitCircleGrid(M, np.zeros(M))
        # Fold exponents modulo M; exact because z_j^k only depends on k mod M.
        folded = np.zeros(M, dtype=complex)
        np.add.at(folded, np.arange(f.lo, f.hi + 1) % M, f.coeffs)
        return UnitCircleGrid(M, np.fft.ifft(folded) * M)
    if isinstance(f, RationalFunction):
        z = UnitCircleGrid.nodes(M)
        if f.den_degree > 0:
            den_vals = _polyval(f.den, z)
            for r, _ in f.poles():
                if np.min(np.abs(z - r)) < POLE_CLEARANCE:
                    raise PoleOnGrid(f"pole {r:.6g} lies within {POLE_CLEARANCE} of a grid node")
            return UnitCircleGrid(M, _polyval(f.num, z) / den_vals)
        return UnitCircleGrid(M, _polyval(f.num, z) / f.den[0])
    return UnitCircleGrid(M, np.full(M, complex(f)))


def coefficients(g: UnitCircleGrid, lo: int, hi: int) -> LaurentPolynomial:
    """Recover the coefficients of ``z**lo .. z**hi`` from grid samples."""
    if hi - lo >= g.M:
        raise BandTooWide(f"band [{lo}, {hi}] does not fit in a grid of {g.M} nodes")
    spectrum = g.fourier()
    ks = np.arange(lo, hi + 1)
    return LaurentPolynomial(lo, spectrum[ks % g.M])
