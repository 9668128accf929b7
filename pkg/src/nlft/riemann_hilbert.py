"""Riemann-Hilbert factorization of pairs into left and right factors.

Three solvers share this module:

* a fixed-point contraction on a circle grid for pairs with bounded ``a``;
* an exact linear solver for rational pairs that matches principal parts at
  the poles of ``b`` off the circle (the right factor keeps the poles in D*);
* a perturbative construction for rational pairs whose ``b`` has poles on the
  circle, which splits each such pole, solves the regular problem and
  extrapolates the factors back to zero perturbation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import numpy.polynomial.polynomial as npoly

from .errors import (
    ExtrapolationDiverged,
    InputError,
    NotBounded,
    NumericalError,
    OrderMismatch,
    PoleClassificationAmbiguous,
    RankDeficient,
    RepresentationMismatch,
    TruncationInsufficient,
)
from .laurent_core import (
    ROOT_TOL,
    RationalFunction,
    UnitCircleGrid,
    grid_size_for,
    next_power_of_two,
)
from .spectral_factorization import a_from_b_rational
from .su11_pairs import CoefficientSequence, SU11Pair, pair_inverse, pair_product

AMBIGUOUS_BAND = 1e-6
CONTOUR_NODES = 128
MAX_GRID = 1 << 20


@dataclass(frozen=True)
class PoleParameters:
    """Data attached to a pole ``z`` of ``a`` on the circle.

    ``n`` is its order in ``a``; ``n_plus`` and ``n_minus`` its orders in the
    right and left factors.  ``mu`` is the leading coefficient of
    ``1/(a a*)`` at ``z``; ``mu_plus`` and ``mu_minus`` the corresponding
    coefficients of the factors, present when the pole is shared.
    """

    location: complex
    n: int
    n_plus: int
    n_minus: int
    mu: float
    mu_plus: Optional[float] = None
    mu_minus: Optional[float] = None

    @property
    def shared(self) -> bool:
        return self.n_plus > 0 and self.n_minus > 0

    def to_json(self) -> dict:
        return {"location": [self.location.real, self.location.imag], "n": self.n,
                "n_plus": self.n_plus, "n_minus": self.n_minus, "mu": self.mu,
                "mu_plus": self.mu_plus, "mu_minus": self.mu_minus}

    @classmethod
    def from_json(cls, data: dict) -> "PoleParameters":
        loc = data["location"]
        loc = complex(loc[0], loc[1]) if isinstance(loc, (list, tuple)) else complex(loc)
        return cls(loc, int(data["n"]), int(data["n_plus"]), int(data["n_minus"]),
                   float(data["mu"]), data.get("mu_plus"), data.get("mu_minus"))


@dataclass(frozen=True, eq=False)
class RHFactorization:
    """``pair = left * middle * right`` (``middle`` is the identity when absent)."""

    left: SU11Pair
    right: SU11Pair
    middle: Optional[SU11Pair] = None
    pole_parameters: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    def product(self) -> SU11Pair:
        out = self.left if self.middle is None else pair_product(self.left, self.middle)
        return pair_product(out, self.right)

    def energies(self) -> dict:
        out = {"left": energy(self.left), "right": energy(self.right)}
        if self.middle is not None:
            out["middle"] = energy(self.middle)
        return out

    def to_json(self) -> dict:
        out = {"left": self.left.to_json(), "right": self.right.to_json(),
               "pole_parameters": [p.to_json() for p in self.pole_parameters],
               "diagnostics": _jsonable(self.diagnostics)}
        if self.middle is not None:
            out["middle"] = self.middle.to_json()
        return out


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def energy(p: SU11Pair) -> float:
    """``log a(inf)``."""
    return float(np.log(p.a_at_infinity()))


# ---------------------------------------------------------------------------
# grid contraction for bounded a


def _project_disc(values: np.ndarray) -> np.ndarray:
    """Keep Fourier modes ``k >= 0`` (holomorphic in D)."""
    M = values.size
    spec = np.fft.fft(values)
    spec[M // 2:] = 0.0
    return np.fft.ifft(spec)


def _project_exterior(values: np.ndarray) -> np.ndarray:
    """Keep Fourier modes ``k <= 0`` (holomorphic in D*, including infinity)."""
    M = values.size
    spec = np.fft.fft(values)
    spec[1:M // 2] = 0.0
    return np.fft.ifft(spec)


def _pair_band(p: SU11Pair) -> int:
    if p.kind == "laurent":
        return (p.a.hi - p.a.lo) + (p.b.hi - p.b.lo) + 1
    if p.kind == "rational":
        return p.a.num_degree + p.a.den_degree + p.b.num_degree + p.b.den_degree + 1
    return p.a.M // 4


def quotient_grid(p: SU11Pair, tol: float = 1e-13, minimum: int = 256) -> tuple[int, np.ndarray, np.ndarray]:
    """Grid size and samples of ``(a, b)`` fine enough that ``b/a`` is resolved.

    The Fourier tail of ``b/a`` between ``M/4`` and ``M/2`` must fall below
    ``tol``; otherwise the grid is doubled up to ``2**20``.
    """
    if p.kind == "grid":
        a, b = p.samples(p.a.M)
        return p.a.M, a, b
    M = grid_size_for(8 * _pair_band(p), minimum)
    while M <= MAX_GRID:
        a, b = p.samples(M)
        spec = np.abs(np.fft.fft(b / a)) / M
        k = np.abs(np.fft.fftfreq(M, d=1.0 / M))
        if np.max(spec[k >= M // 4], initial=0.0) <= tol * max(1.0, np.max(spec)):
            return M, a, b
        M *= 2
    raise TruncationInsufficient(f"b/a is not resolved on grids up to {MAX_GRID} points")


def rh_contraction_bounded(p: SU11Pair, tol: float = 1e-12, max_iter: int = 100000) -> RHFactorization:
    """Factor a pair with bounded ``a`` by iterating the contraction

        (A, B) -> (1 + P_{D*}(conj(b/a) B), P_D((b/a) A))

    on a circle grid.  The fixed point gives ``a_+ = A / sqrt(A(inf))`` and
    ``b_+ = B / sqrt(A(inf))``; the left factor is ``(a, b)(a_+, b_+)^{-1}``.
    The iteration stops when successive iterates differ by less than
    ``tol (1 - kappa)`` with ``kappa = sup |b/a| < 1``, or reach rounding
    level.  The rate is ``kappa``, so data with ``kappa`` near 1 is slow.
    """
    if p.kind == "rational":
        for r, _ in p.a.reduced().poles():
            if abs(abs(r) - 1) <= AMBIGUOUS_BAND:
                raise NotBounded(f"a has a pole at {r:.12g} on the circle")
    M, a, b = quotient_grid(p)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise NotBounded("samples of a or b are not finite")
    r = b / a
    kappa = float(np.max(np.abs(r)))
    if kappa >= 1 - 1e-9:
        raise NotBounded(f"sup |b/a| = {kappa:.12g} is not below 1")
    A = np.ones(M, dtype=complex)
    B = np.zeros(M, dtype=complex)
    history = []
    # Successive differences cannot fall below the rounding level of the iterates.
    threshold = max(tol * (1 - kappa), 16 * np.finfo(float).eps * float(np.max(np.abs(a))))
    for it in range(1, max_iter + 1):
        B_new = _project_disc(r * A)
        A_new = 1.0 + _project_exterior(np.conj(r) * B)
        diff = np.sqrt(np.mean(np.abs(A_new - A) ** 2) + np.mean(np.abs(B_new - B) ** 2))
        history.append(diff)
        A, B = A_new, B_new
        if diff < threshold:
            break
    else:
        raise NumericalError(f"contraction did not converge in {max_iter} iterations")
    ratios = [history[i + 1] / history[i] for i in range(len(history) - 1)
              if history[i] > 1e4 * np.finfo(float).eps and history[i + 1] > 0]
    observed = float(max(ratios)) if ratios else 0.0
    a_inf = float(np.mean(A).real)
    root = np.sqrt(a_inf)
    a_plus, b_plus = A / root, B / root
    a_minus = a * np.conj(a_plus) - b * np.conj(b_plus)
    b_minus = -a * b_plus + b * a_plus
    whole_inf = p.a_at_infinity()
    right = SU11Pair(UnitCircleGrid(M, a_plus), UnitCircleGrid(M, b_plus), root)
    left = SU11Pair(UnitCircleGrid(M, a_minus), UnitCircleGrid(M, b_minus), whole_inf / root)
    return RHFactorization(left, right, diagnostics={
        "grid_size": M, "iterations": it, "kappa": kappa, "observed_rate": observed,
        "final_difference": history[-1]})


# ---------------------------------------------------------------------------
# contour integrals


def _circle(center: complex, radius: float, K: int = CONTOUR_NODES) -> tuple[np.ndarray, np.ndarray]:
    w = radius * np.exp(2j * np.pi * np.arange(K) / K)
    return center + w, w


def laurent_coefficients(h, center, radius: float, orders, K: int = CONTOUR_NODES) -> dict:
    """Coefficients of ``(z - center)**j`` in the Laurent expansion of ``h``.

    ``center = None`` expands at infinity in powers ``z**j``.  The contour is
    the circle of the given radius, sampled at ``K`` trapezoid nodes.
    """
    if center is None:
        nodes, w = _circle(0.0, radius, K)
    else:
        nodes, w = _circle(center, radius, K)
    values = h(nodes)
    return {j: complex(np.mean(values * w ** (-j))) for j in orders}


def winding_order(f, center: complex, radius: float = 1e-3, K: int = 4096) -> int:
    """Net pole order of ``f`` at ``center`` (negative for a zero), by the argument principle."""
    nodes, _ = _circle(center, radius, K)
    vals = f(nodes)
    if not np.all(np.isfinite(vals)) or np.min(np.abs(vals)) == 0:
        raise PoleClassificationAmbiguous(f"f vanishes or blows up on the circle around {center:.12g}")
    phase = np.unwrap(np.angle(np.concatenate([vals, vals[:1]])))
    return -int(round((phase[-1] - phase[0]) / (2 * np.pi)))


# ---------------------------------------------------------------------------
# exact rational splitting


def _points(fn: RationalFunction) -> list[complex]:
    out = []
    if fn.num_degree > 0:
        out += [r for r, _ in fn.zeros()]
    if fn.den_degree > 0:
        out += [r for r, _ in fn.poles()]
    return out


def _radius(center: complex, singular: list[complex]) -> float:
    gaps = [abs(s - center) for s in singular if abs(s - center) > 1e-10]
    return 0.45 * min(gaps) if gaps else 0.5


def _principal_basis(center: complex, order: int, z) -> np.ndarray:
    return (np.asarray(z, dtype=complex) - center) ** (-order)


def _reduced_pair(p: SU11Pair) -> tuple[RationalFunction, RationalFunction]:
    if p.kind == "laurent":
        p = p.as_rational()
    if p.kind != "rational":
        raise RepresentationMismatch("the exact splitter needs a Laurent or rational pair")
    return p.a.reduced(), p.b.reduced()


def _classify_point(r: complex) -> str:
    gap = abs(r) - 1.0
    if abs(gap) <= ROOT_TOL:
        return "T"
    if abs(gap) <= AMBIGUOUS_BAND:
        raise PoleClassificationAmbiguous(f"pole {r:.12g} is within {AMBIGUOUS_BAND} of the circle")
    return "D" if gap < 0 else "D*"


def split_rational(p: SU11Pair, reduce_left: bool = True) -> tuple[SU11Pair, SU11Pair]:
    """``p = left * right`` with ``right`` in H whose ``b`` keeps exactly the poles of ``b`` in D*.

    Solves a square linear system for the principal parts of ``A = a(inf)_+ a_+``
    and ``B = a(inf)_+ b_+``: the principal parts of ``(b*/a*) B`` at the
    reflected poles must equal those of ``A``, the principal parts of
    ``(b/a) A`` at the poles in D* (and at infinity) must equal those of
    ``B``, with one normalization at zero and one at infinity.  Poles of ``b``
    on the circle or in D stay with the left factor.
    """
    a, b = _reduced_pair(p)
    if b.is_zero():
        one = SU11Pair(RationalFunction.constant(1.0), RationalFunction([0.0], [1.0]))
        return SU11Pair(a, b), one
    outer = []
    for r, m in b.poles():
        if _classify_point(r) == "D*":
            outer.append((complex(r), m))
    k_inf = max(0, b.order_at_infinity())
    inner = [(1 / np.conj(r), m) for r, m in outer]
    if k_inf:
        inner.append((0j, k_inf))

    a_star, b_star = a.star(), b.star()
    singular = _points(a) + _points(b) + _points(a_star) + _points(b_star)
    singular += [c for c, _ in outer] + [c for c, _ in inner]
    r_plus = lambda z: b(z) / a(z)  # noqa: E731
    r_minus = lambda z: b_star(z) / a_star(z)  # noqa: E731

    a_terms = [("const", 0)] + [(c, m) for c, k in inner for m in range(1, k + 1)]
    b_terms = [("const", 0)] + [(c, m) for c, k in outer for m in range(1, k + 1)]
    b_terms += [("inf", m) for m in range(1, k_inf + 1)]

    def basis(term, z):
        c, m = term
        z = np.asarray(z, dtype=complex)
        if c == "const":
            return np.ones_like(z)
        if c == "inf":
            return z ** m
        return _principal_basis(c, m, z)

    na, nb = len(a_terms), len(b_terms)
    rows, rhs = [], []
    zero_radius = _radius(0j, singular)
    big = 2.0 * max([abs(s) for s in singular] + [1.0]) + 1.0

    # principal parts of (b*/a*) B at the inner points equal those of A
    for c, k in inner:
        rad = _radius(c, singular)
        coeffs = [laurent_coefficients(lambda z, t=t: r_minus(z) * basis(t, z), c, rad,
                                       range(-k, 0)) for t in b_terms]
        for m in range(1, k + 1):
            row = np.zeros(na + nb, dtype=complex)
            row[na:] = [cf[-m] for cf in coeffs]
            row[a_terms.index((c, m))] -= 1.0
            rows.append(row)
            rhs.append(0.0)
    # constant coefficient at 0 of (b*/a*) B - A equals -1
    row = np.zeros(na + nb, dtype=complex)
    for i, t in enumerate(b_terms):
        row[na + i] = laurent_coefficients(lambda z, t=t: r_minus(z) * basis(t, z), 0j,
                                           zero_radius, [0])[0]
    for i, (c, m) in enumerate(a_terms):
        if c == "const":
            row[i] -= 1.0
        elif abs(c) > 1e-14:
            row[i] -= (-c) ** (-m)
    rows.append(row)
    rhs.append(-1.0)
    # principal parts of (b/a) A at the outer points and at infinity equal those of B
    for c, k in outer:
        rad = _radius(c, singular)
        coeffs = [laurent_coefficients(lambda z, t=t: r_plus(z) * basis(t, z), c, rad,
                                       range(-k, 0)) for t in a_terms]
        for m in range(1, k + 1):
            row = np.zeros(na + nb, dtype=complex)
            row[:na] = [cf[-m] for cf in coeffs]
            row[na + b_terms.index((c, m))] -= 1.0
            rows.append(row)
            rhs.append(0.0)
    at_inf = [laurent_coefficients(lambda z, t=t: r_plus(z) * basis(t, z), None, big,
                                   range(0, k_inf + 1)) for t in a_terms]
    for m in range(1, k_inf + 1):
        row = np.zeros(na + nb, dtype=complex)
        row[:na] = [cf[m] for cf in at_inf]
        row[na + b_terms.index(("inf", m))] -= 1.0
        rows.append(row)
        rhs.append(0.0)
    # constant coefficient at infinity of (b/a) A - B vanishes
    row = np.zeros(na + nb, dtype=complex)
    row[:na] = [cf[0] for cf in at_inf]
    for i, (c, m) in enumerate(b_terms):
        if c == "const":
            row[na + i] -= 1.0
    rows.append(row)
    rhs.append(0.0)

    matrix = np.array(rows)
    if np.linalg.cond(matrix) > 1e13:
        raise RankDeficient(f"principal-part system is singular (cond {np.linalg.cond(matrix):.3e})")
    x = np.linalg.solve(matrix, np.array(rhs, dtype=complex))
    alpha, beta = x[:na], x[na:]
    a_inf = alpha[0]
    if abs(a_inf.imag) > 1e-8 * abs(a_inf) or a_inf.real <= 0:
        raise NumericalError(f"normalization A(inf) = {a_inf} is not positive")
    root = np.sqrt(a_inf.real)
    A = _assemble(a_terms, alpha, inner, [])
    B = _assemble(b_terms, beta, outer, range(1, k_inf + 1))
    right = SU11Pair(A * (1 / root), B * (1 / root))
    left = pair_product(SU11Pair(a, b), pair_inverse(right))
    if reduce_left:
        left = SU11Pair(left.a.reduced(), left.b.reduced())
    return left, right


def _assemble(terms, coeffs, centers, powers) -> RationalFunction:
    """Sum of the constant, principal parts at ``centers`` and monomials ``z**m``."""
    den_roots = [c for c, k in centers for _ in range(k)]
    den = npoly.polyfromroots(den_roots) if den_roots else np.ones(1)
    num = np.zeros(1, dtype=complex)
    for (c, m), value in zip(terms, coeffs):
        if c == "const":
            part = value * np.asarray(den, dtype=complex)
        elif c == "inf":
            part = value * npoly.polymul(np.eye(1, m + 1, m)[0], den)
        else:
            rest = [d for d, k in centers for _ in range(k) if d != c]
            rest += [c] * (dict(centers)[c] - m)
            part = value * (npoly.polyfromroots(rest) if rest else np.ones(1))
        num = npoly.polyadd(num, part)
    return RationalFunction(num, den)


def _shift_pair(p: SU11Pair, k: int) -> SU11Pair:
    return SU11Pair(p.a, p.b.shift(k))


def _reflect_pair(p: SU11Pair) -> SU11Pair:
    return SU11Pair(p.a.star().reflect(), p.b.reflect())


def triple_factorization_rational(p: SU11Pair) -> RHFactorization:
    """``p = X_-- X_o X_++`` for a rational pair.

    ``X_++`` carries the poles of ``b`` in D*, ``X_--`` those in D and
    ``X_o`` those on the circle; ``X_--`` and ``X_o`` lie in H_0* and
    ``X_++`` in H.  The middle factor is split off the left factor by
    reflecting it (which reverses products) and solving a shifted problem.
    """
    a, b = _reduced_pair(p)
    pair = SU11Pair(a, b)
    left1, right = split_rational(pair)
    on_circle = [r for r, _ in b.poles() if _classify_point(r) == "T"]
    if not on_circle:
        middle = SU11Pair(RationalFunction.constant(1.0), RationalFunction([0.0], [1.0]))
        left = left1
    else:
        mirrored = _shift_pair(_reflect_pair(left1), -1)
        u, v = split_rational(mirrored)
        middle = _reflect_pair(_shift_pair(u, 1))
        left = _reflect_pair(_shift_pair(v, 1))
        middle = SU11Pair(middle.a.reduced(), middle.b.reduced())
        left = SU11Pair(left.a.reduced(), left.b.reduced())
    return RHFactorization(left, right, middle, diagnostics={"circle_poles": on_circle})


# ---------------------------------------------------------------------------
# poles on the circle


def _taylor_coefficient(h, center: complex, order: int, radius: float = 1e-2,
                        K: int = CONTOUR_NODES) -> complex:
    return laurent_coefficients(h, center, radius, [order], K)[order]


def circle_poles(a: RationalFunction, tol: float = AMBIGUOUS_BAND) -> list[complex]:
    """Distinct poles of ``a`` on the unit circle."""
    return [complex(r / abs(r)) for r, _ in a.reduced().poles() if abs(abs(r) - 1) <= tol]


def classify_poles(f: RHFactorization, pair: Optional[SU11Pair] = None,
                   radius: float = 1e-2, tol: float = 1e-3) -> tuple[PoleParameters, ...]:
    """Orders and leading coefficients at each pole of ``a`` on the circle.

    The middle factor, when present, is merged into the left factor.  Orders
    come from the argument principle; ``mu`` is read off ``1/(a a*)``,
    ``mu_plus`` off ``a_-* / (a_+ a*)`` and ``mu_minus`` off
    ``a_+ / (a_-* a)``.  Shared poles must satisfy ``n_+ + n_- = n + 1`` and
    ``mu_+ mu_- = mu`` within ``tol`` (relative), else :class:`OrderMismatch`.
    """
    left = f.left if f.middle is None else pair_product(f.left, f.middle)
    if pair is None:
        pair = pair_product(left, f.right)
    a = pair.a
    a_m, a_p = left.a, f.right.a
    a_star, a_m_star = a.star(), a_m.star()
    out = []
    for z in circle_poles(a):
        rad = min(radius, 0.45 * min([abs(z - s) for s in _points(a) + _points(a_m) + _points(a_p)
                                      if abs(z - s) > 1e-5] + [1.0]))
        n = winding_order(a, z, rad)
        n_plus = max(0, winding_order(a_p, z, rad))
        n_minus = max(0, winding_order(a_m, z, rad))
        unit = -1 / z ** 2
        mu = _taylor_coefficient(lambda s: 1 / (a(s) * a_star(s)), z, 2 * n, rad) / unit ** n
        mu_plus = mu_minus = None
        if n_plus and n_minus:
            if n_plus + n_minus != n + 1:
                raise OrderMismatch(f"orders at {z:.6g}: n+={n_plus}, n-={n_minus}, n={n}")
            c_plus = _taylor_coefficient(lambda s: a_m_star(s) / (a_p(s) * a_star(s)), z,
                                         2 * n_plus - 1, rad)
            c_minus = _taylor_coefficient(lambda s: a_p(s) / (a_m_star(s) * a(s)), z,
                                          2 * n_minus - 1, rad)
            mu_plus = complex(-c_plus / (z * unit ** n_plus))
            mu_minus = complex(-c_minus / (np.conj(z) * unit ** (n_minus - 1)))
            for name, val in (("mu_plus", mu_plus), ("mu_minus", mu_minus)):
                if abs(val.imag) > tol * abs(val) or val.real <= 0:
                    raise OrderMismatch(f"{name} = {val} at {z:.6g} is not positive")
            mu_plus, mu_minus = mu_plus.real, mu_minus.real
            if abs(mu_plus * mu_minus - mu.real) > tol * abs(mu):
                raise OrderMismatch(f"mu+ mu- = {mu_plus * mu_minus:.8g} differs from mu = {mu.real:.8g}")
        elif n_plus + n_minus != n:
            raise OrderMismatch(f"orders at {z:.6g}: n+={n_plus}, n-={n_minus}, n={n}")
        out.append(PoleParameters(z, n, n_plus, n_minus, float(mu.real), mu_plus, mu_minus))
    return tuple(out)


def _perturbed_locations(z: complex, n_plus: int, n_minus: int, mu_plus, mu_minus,
                         eps: float, angle: float) -> tuple[Optional[complex], Optional[complex]]:
    """Positions ``z_+`` in D* and ``z_-`` in D approaching ``z``.

    For a shared pole the distances of ``z_-`` and ``conj(1/z_+)`` from
    ``z`` satisfy ``mu_+ |z_+* - z|^(2 n_+) = mu_- |z_- - z|^(2 n_-)``, the
    larger of them being ``eps``.  The two approach
    directions differ by ``2 angle`` so the reflected points stay distinct.
    """
    tilt = np.exp(1j * angle)
    eps_minus = eps_plus = eps
    if n_plus and n_minus:
        # the larger of the two distances is eps
        eps_plus = (mu_minus * eps ** (2 * n_minus) / mu_plus) ** (1.0 / (2 * n_plus))
        if eps_plus > eps:
            eps_plus = eps
            eps_minus = (mu_plus * eps ** (2 * n_plus) / mu_minus) ** (1.0 / (2 * n_minus))
    z_minus = z * (1 - eps_minus * tilt) if n_minus else None
    if not n_plus:
        return None, z_minus
    z_plus = z / (1 - eps_plus * tilt)
    return z_plus, z_minus


def _numerator_coefficients(f, poles: list[complex], degree: int,
                            radius: float = 2.0, K: int = 64) -> np.ndarray:
    """Coefficients of ``f(z) prod (z - p)`` assuming it is a polynomial of ``degree``."""
    nodes = radius * np.exp(2j * np.pi * np.arange(K) / K)
    den = npoly.polyfromroots(poles) if poles else np.ones(1)
    vals = f(nodes) * npoly.polyval(nodes, den)
    coeffs = np.fft.fft(vals) / K / radius ** np.arange(K)
    tail = np.max(np.abs(coeffs[degree + 1:K // 2]), initial=0.0)
    if tail > 1e-6 * max(1.0, np.max(np.abs(coeffs[:degree + 1]))):
        raise ExtrapolationDiverged(f"factor is not rational with the assumed poles (tail {tail:.2e})")
    return coeffs[:degree + 1]


def _richardson(values: list[np.ndarray]) -> tuple[np.ndarray, float]:
    """Extrapolate to zero along ``eps_k = eps_0 2^-k``; returns the limit and a Cauchy gap."""
    table = [list(values)]
    for j in range(1, len(values)):
        prev = table[-1]
        table.append([(2 ** j * prev[i + 1] - prev[i]) / (2 ** j - 1) for i in range(len(prev) - 1)])
    best = table[-1][0]
    gap = float(np.max(np.abs(best - table[-2][-1]))) if len(table) > 1 else np.inf
    return best, gap


def shared_pole_factorization(p: SU11Pair, parameters: dict, eps0: float = 0.2, levels: int = 5,
                              angle: float = np.pi / 6, cauchy_tol: float = 1e-4) -> RHFactorization:
    """Factor a rational pair whose ``b`` has poles on the circle with prescribed splitting data.

    ``parameters`` maps each circle pole of ``b`` (any point within 1e-6)
    to ``(n_plus, n_minus)`` or ``(n_plus, n_minus, mu_plus, mu_minus)``.
    Each pole ``z`` is replaced by ``z_+`` in D* of order ``n_plus`` and
    ``z_-`` in D of order ``n_minus``; a shared pole also gains a zero at
    ``z``.  The perturbed pair has no circle poles and is split exactly; the
    numerators of the factors over their moving denominators are
    extrapolated to zero perturbation by Richardson's scheme along
    ``eps_k = eps0 2^-k``.  The perturbed problems lose about ``eps**-3`` in
    relative accuracy, so the schedule starts at a moderate ``eps0`` (capped
    at a quarter of the spacing between circle poles).
    """
    a, b = _reduced_pair(p)
    circle, off = [], []
    for r, m in b.poles():
        (circle if abs(abs(r) - 1) <= AMBIGUOUS_BAND else off).append((complex(r / abs(r)), m))
    if not circle:
        raise InputError("b has no poles on the circle")
    if off:
        raise InputError("b has poles off the circle; split them off with the triple factorization first")
    plan = []
    for z, m in circle:
        key = next((k for k in parameters if abs(complex(k) - z) <= 1e-6), None)
        if key is None:
            raise InputError(f"no splitting data for the pole at {z:.12g}")
        spec = tuple(parameters[key])
        n_plus, n_minus = int(spec[0]), int(spec[1])
        mu_plus = mu_minus = None
        if n_plus and n_minus:
            if len(spec) < 4:
                raise InputError(f"shared pole at {z:.6g} needs mu_plus and mu_minus")
            mu_plus, mu_minus = float(spec[2]), float(spec[3])
            if n_plus + n_minus != m + 1:
                raise OrderMismatch(f"shared split ({n_plus}, {n_minus}) of an order-{m} pole")
            if mu_plus <= 0 or mu_minus <= 0:
                raise InputError("mu_plus and mu_minus must be positive")
        elif n_plus + n_minus != m:
            raise OrderMismatch(f"split ({n_plus}, {n_minus}) of an order-{m} pole")
        plan.append((z, m, n_plus, n_minus, mu_plus, mu_minus))
    if len(circle) > 1:
        spacing = min(abs(z1 - z2) for i, (z1, _) in enumerate(circle) for z2, _ in circle[i + 1:])
        eps0 = min(eps0, 0.25 * spacing)

    zeros_b = [r for r, m in b.zeros() for _ in range(m)]
    gain = b.num[-1] / b.den[-1]
    names = ("a_plus", "b_plus", "a_minus", "b_minus")
    levels_out = {name: [] for name in names}
    limit_poles = {name: [] for name in names}
    eps_list = [eps0 * 2.0 ** -k for k in range(levels)]
    for eps in eps_list:
        new_zeros, new_poles = list(zeros_b), []
        moving = {name: [] for name in names}
        for z, m, n_plus, n_minus, mu_plus, mu_minus in plan:
            z_plus, z_minus = _perturbed_locations(z, n_plus, n_minus, mu_plus, mu_minus, eps, angle)
            if n_plus and n_minus:
                new_zeros.append(z)
            if n_plus:
                new_poles += [z_plus] * n_plus
                moving["b_plus"] += [z_plus] * n_plus
                moving["a_plus"] += [1 / np.conj(z_plus)] * n_plus
            if n_minus:
                new_poles += [z_minus] * n_minus
                moving["b_minus"] += [z_minus] * n_minus
                moving["a_minus"] += [z_minus] * n_minus
        b_eps = RationalFunction.from_roots(gain, new_zeros, new_poles)
        a_eps = a_from_b_rational(b_eps)
        _, right = split_rational(SU11Pair(a_eps, b_eps), reduce_left=False)
        a_ps, b_ps = right.a.star(), right.b.star()
        funcs = {
            "a_plus": right.a,
            "b_plus": right.b,
            # left = (a, b)(a_+*, -b_+), evaluated pointwise to avoid cancelling roots
            "a_minus": lambda w: a_eps(w) * a_ps(w) - b_eps(w) * b_ps(w),
            "b_minus": lambda w: -a_eps(w) * right.b(w) + b_eps(w) * right.a(w),
        }
        for name in names:
            levels_out[name].append(_numerator_coefficients(funcs[name], moving[name], len(moving[name])))
    for z, m, n_plus, n_minus, _, _ in plan:
        limit_poles["a_plus"] += [z] * n_plus
        limit_poles["b_plus"] += [z] * n_plus
        limit_poles["a_minus"] += [z] * n_minus
        limit_poles["b_minus"] += [z] * n_minus

    limits = {}
    gaps = {}
    for name, seq in levels_out.items():
        width = max(v.size for v in seq)
        seq = [np.pad(v, (0, width - v.size)) for v in seq]
        value, gap = _richardson(seq)
        scale = max(1.0, float(np.max(np.abs(value))))
        gaps[name] = gap / scale
        if gap > cauchy_tol * scale:
            raise ExtrapolationDiverged(f"extrapolation of {name} is not settled (gap {gap:.2e})")
        den = npoly.polyfromroots(limit_poles[name]) if limit_poles[name] else np.ones(1)
        limits[name] = RationalFunction(value, den)
    right = SU11Pair(limits["a_plus"], limits["b_plus"])
    left = SU11Pair(limits["a_minus"], limits["b_minus"])
    fact = RHFactorization(left, right, diagnostics={"eps": eps_list, "cauchy_gaps": gaps})
    params = classify_poles(fact, SU11Pair(a, b), tol=max(1e-3, 10 * cauchy_tol))
    return RHFactorization(left, right, pole_parameters=params, diagnostics=fact.diagnostics)


def reconstruction_deviation(f: RHFactorization, p: SU11Pair, M: int = 1024) -> float:
    """Relative deviation ``|product - p| / (|a| + |b|)`` on a circle grid.

    Grid pairs are compared on their own grid; otherwise the grid is
    half-shifted.  The half shift keeps nodes off the roots of unity, where circle poles
    usually sit; dividing by the local size keeps the measure meaningful
    next to a pole.
    """
    prod = f.product()
    if prod.kind == "grid" or p.kind == "grid":
        M = prod.a.M if prod.kind == "grid" else p.a.M
        a1, b1 = prod.samples(M)
        a0, b0 = p.samples(M)
    else:
        z = np.exp(2j * np.pi * (np.arange(M) + 0.5) / M)
        a1, b1 = prod.a(z), prod.b(z)
        a0, b0 = p.a(z), p.b(z)
    return float(np.max((np.abs(a1 - a0) + np.abs(b1 - b0)) / (np.abs(a0) + np.abs(b0))))


# ---------------------------------------------------------------------------
# projection recursion


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    """Coefficients recovered by the projection recursion, with the recursion's norms."""

    sequence: CoefficientSequence
    norms: np.ndarray
    a_infinity: np.ndarray
    grid_size: int


def _inner(A1, B1, A2, B2, r) -> float:
    """``int Re[A1 (A2* - r B2*) + B1* (B2 - r A2)]`` on the grid."""
    val = A1 * (np.conj(A2) - r * np.conj(B2)) + np.conj(B1) * (B2 - r * A2)
    return float(np.mean(val).real)


def projection_recursion(p: SU11Pair, N: int, start: Optional[int] = None) -> ProjectionResult:
    """Recover ``F_start, ..., F_{start+N-1}`` by successive projections.

    Starting from ``(A, B) = a(inf) (a, b)``, each step reads
    ``F_n = [z^n](B/a*) / (A*/a*)(0)`` and replaces
    ``(A, B)`` by ``(A - F_n z^n B*, B - F_n z^n A*)``.  The returned norms
    are those of the pairs ``(A_n, B_n)`` in the inner product in which the
    recursion is an orthogonal projection.
    """
    M, a, b = quotient_grid(p)
    if start is None:
        start = p.b.lo if p.kind == "laurent" else 0
    if N + abs(start) >= M // 2:
        M2 = next_power_of_two(4 * (N + abs(start)) + 4)
        a, b = p.samples(M2) if p.kind != "grid" else (a, b)
        M = M2 if p.kind != "grid" else M
    z = np.exp(2j * np.pi * np.arange(M) / M)
    r = b / a
    a_inf = p.a_at_infinity()
    A, B = a_inf * a, a_inf * b
    inv_astar = 1.0 / np.conj(a)
    values, norms, a_infs = [], [], []
    for n in range(start, start + N):
        norms.append(np.sqrt(max(_inner(A, B, A, B, r), 0.0)))
        a_infs.append(float(np.mean(A).real))
        num = np.mean(B * inv_astar * z ** (-n))
        den = np.mean(np.conj(A) * inv_astar)
        F = complex(num / den)
        values.append(F)
        zn = z ** n
        A, B = A - F * zn * np.conj(B), B - F * zn * np.conj(A)
    norms.append(np.sqrt(max(_inner(A, B, A, B, r), 0.0)))
    a_infs.append(float(np.mean(A).real))
    return ProjectionResult(CoefficientSequence(start, values), np.array(norms), np.array(a_infs), M)


__all__ = [
    "PoleParameters", "RHFactorization", "ProjectionResult", "energy", "rh_contraction_bounded",
    "split_rational", "triple_factorization_rational", "classify_poles", "circle_poles",
    "shared_pole_factorization", "projection_recursion", "reconstruction_deviation",
    "laurent_coefficients", "winding_order", "quotient_grid",
]
