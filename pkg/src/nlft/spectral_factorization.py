"""Recover ``a`` from ``b`` and reconstruct outer functions from a boundary modulus.

For a Laurent polynomial ``b`` the function ``P = 1 + b b*`` is positive on
the circle; ``a`` is the polynomial in ``1/z`` whose zeros are the roots of
``P`` inside the disc.  For rational ``b`` the same bookkeeping is done with
zeros and poles of ``g = 1 + b b*``, poles on the circle contributing at half
order.
"""

from __future__ import annotations

import numpy as np

from .errors import NonFiniteSamples, OddPoleOrderOnT, RootClassificationAmbiguous
from .laurent_core import (
    POLE_CLEARANCE,
    ROOT_TOL,
    LaurentPolynomial,
    RationalFunction,
    UnitCircleGrid,
    cluster_roots,
    roots,
)

_MATCH_POINTS = (1.0, 1j, -1.0, -1j)


def _classify(r: complex) -> str:
    gap = abs(r) - 1.0
    if abs(gap) <= ROOT_TOL:
        return "T"
    return "D" if gap < 0 else "D*"


def a_from_b_laurent(b: LaurentPolynomial) -> LaurentPolynomial:
    """The unique ``a`` with ``a a* = 1 + b b*``, no zeros in D*, and ``a(inf) > 0``."""
    if b.is_zero():
        return LaurentPolynomial.constant(1.0)
    P = 1 + b * b.star()
    # Degree detection: ends below the trim tolerance do not count.
    P = LaurentPolynomial(P.lo, P.coeffs)
    n = -P.lo
    if n == 0:
        return LaurentPolynomial.constant(np.sqrt(P.coefficient(0).real))
    # z^n P is an ordinary polynomial of degree 2n; its roots pair up as (r, 1/conj(r)).
    found = roots(P.coeffs)
    inside = []
    for r in found:
        where = _classify(r)
        if where == "T":
            raise RootClassificationAmbiguous(f"root {r:.12g} of 1 + bb* lies on the circle within {ROOT_TOL}")
        if where == "D":
            inside.append(r)
    if len(inside) != n:
        raise RootClassificationAmbiguous(f"expected {n} roots in the disc, found {len(inside)}")
    # prod (1 - r w) in the variable w = 1/z, ascending in w.
    q = np.ones(1, dtype=complex)
    for r in inside:
        q = np.convolve(q, [1.0, -r])
    shape = LaurentPolynomial(-n, q[::-1])
    for z0 in _MATCH_POINTS:
        value = abs(shape(z0))
        if value > POLE_CLEARANCE:
            scale = np.sqrt(P(z0).real) / value
            return shape * scale
    raise RootClassificationAmbiguous("no usable normalization point on the circle")


def a_from_b_rational(b: RationalFunction) -> RationalFunction:
    """The unique rational ``a`` with ``a a* = 1 + b b*``, holomorphic and zero-free in D*, ``a(inf) > 0``."""
    if b.is_zero():
        return RationalFunction.constant(1.0)
    known = []
    if b.den_degree > 0:
        for r, _ in b.poles():
            known.append(r)
            if abs(r) > 0:
                known.append(1 / np.conj(r))
    if b.order_at_infinity() > 0:
        known.append(0j)
    return spectral_factor_rational(1 + b * b.star(), known)


def spectral_factor_rational(g: RationalFunction, known_poles=()) -> RationalFunction:
    """Factor a rational ``g`` that is positive on the circle as ``a a*``.

    ``a`` keeps the zeros and poles of ``g`` inside the disc, takes the poles
    of ``g`` on the circle at half order, has no zeros or poles in D* and
    satisfies ``a(inf) > 0``.  Computed poles within 1e-4 of an entry of
    ``known_poles`` are replaced by that entry, which is usually more
    accurate than a root of the product denominator.
    """
    zeros = [[r, m] for r, m in (cluster_roots(roots(g.num)) if g.num_degree > 0 else [])]
    poles = [[r, m] for r, m in (cluster_roots(roots(g.den), poly=g.den) if g.den_degree > 0 else [])]
    for pv in poles:
        if known_poles:
            nearest = min(known_poles, key=lambda q: abs(q - pv[0]))
            if abs(nearest - pv[0]) <= 1e-4 * max(1.0, abs(nearest)):
                pv[0] = complex(nearest)
    # cancel common factors of numerator and denominator
    for zv in zeros:
        for pv in poles:
            if pv[1] and zv[1] and abs(zv[0] - pv[0]) <= 1e-6 * max(1.0, abs(pv[0])):
                k = min(zv[1], pv[1])
                zv[1] -= k
                pv[1] -= k
    a_zeros: list[complex] = []
    a_poles: list[complex] = []
    for r, m in zeros:
        if m == 0:
            continue
        where = _classify(r)
        if where == "T":
            raise RootClassificationAmbiguous(f"zero {r:.12g} lies on the circle within {ROOT_TOL}")
        if where == "D":
            a_zeros += [r] * m
    for r, m in poles:
        if m == 0:
            continue
        where = _classify(r)
        if where == "T":
            if m % 2:
                raise OddPoleOrderOnT(f"pole {r:.12g} on the circle has odd order {m}")
            a_poles += [r] * (m // 2)
        elif where == "D":
            a_poles += [r] * m
    if len(a_zeros) != len(a_poles):
        raise RootClassificationAmbiguous(
            f"zero/pole count mismatch inside the disc ({len(a_zeros)} vs {len(a_poles)})")
    shape = RationalFunction.from_roots(1.0, a_zeros, a_poles)
    for z0 in _MATCH_POINTS:
        gap = min([abs(z0 - p) for p in a_poles + a_zeros] or [np.inf])
        if gap > 1e-3:
            scale = np.sqrt(complex(g(z0)).real) / abs(complex(shape(z0)))
            return shape * scale
    raise RootClassificationAmbiguous("no usable normalization point on the circle")


def pair_from_schur(s: RationalFunction) -> tuple[RationalFunction, RationalFunction]:
    """The pair ``(a, b)`` with ``b / a* = s`` for a rational Schur function ``s``.

    ``a a* = 1 / (1 - s s*)`` fixes ``a`` by spectral factorization; then ``b = s a*``.
    """
    if s.is_zero():
        return RationalFunction.constant(1.0), RationalFunction([0.0], [1.0])
    defect = 1 - s * s.star()
    a = spectral_factor_rational(RationalFunction(defect.den, defect.num))
    b = (s * a.star()).reduced()
    return a, b


def outer_from_modulus(logmod: UnitCircleGrid) -> UnitCircleGrid:
    """Boundary values of the outer function on D* with log-modulus ``logmod``.

    The phase is minus the discrete conjugate function of ``logmod``
    (Fourier multiplier ``-i sign(k)``); the value at infinity is positive.
    """
    u = np.asarray(logmod.samples)
    if not np.all(np.isfinite(u)):
        raise NonFiniteSamples("log-modulus samples must be finite")
    u = u.real
    M = logmod.M
    spectrum = np.fft.fft(u)
    k = np.fft.fftfreq(M, d=1.0 / M)
    sign = np.sign(k)
    if M % 2 == 0:
        sign[M // 2] = 0.0
    conj_fn = np.fft.ifft(-1j * sign * spectrum).real
    return UnitCircleGrid(M, np.exp(u - 1j * conj_fn))
