"""Half-line transform data and orthogonal polynomials on the unit circle.

For ``F`` supported on ``n >= 1`` with truncated transforms ``(a_n, b_n)``,
the orthonormal polynomials of the measure with density
``w = 1 / |a + b*|^2`` are ``phi_n = z^n (a_n + b_n*)``.  The matrix of
``f -> z f`` in that basis is upper Hessenberg with subdiagonal
``(1 - |F_i|^2)^(1/2)``, diagonal ``-F_i conj(F_{i+1})`` and corner
``-conj(F_1)``.  This module computes both sides of that dictionary together
with an independent Gram-Schmidt oracle, the Szego identity and a
positive-definiteness check of measure moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DenominatorVanishes, InputError, RankDeficient
from .forward_nlft import nlft_finite
from .inverse_nlft import reflection_quotient
from .laurent_core import LaurentPolynomial, UnitCircleGrid, next_power_of_two, roots
from .su11_pairs import CoefficientSequence, SU11Pair, transfer_matrix

MIN_MEASURE_GRID = 8192
MAX_MEASURE_GRID = 2 ** 23
PEAK_RESOLUTION = 40.0


@dataclass(frozen=True, eq=False)
class HessenbergBand:
    """Diagonal and subdiagonal of an upper Hessenberg matrix."""

    diag: np.ndarray
    subdiag: np.ndarray

    def __post_init__(self):
        diag = np.array(self.diag, dtype=complex)
        sub = np.array(self.subdiag, dtype=float)
        if sub.size and np.min(sub) <= 0:
            raise InputError("subdiagonal entries must be strictly positive")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "subdiag", sub)

    def to_json(self) -> dict:
        return {"diag": [[d.real, d.imag] for d in self.diag], "subdiag": self.subdiag.tolist()}


@dataclass(frozen=True, eq=False)
class MeasureDensity:
    """Nonnegative density samples on the circle grid and their total mass."""

    grid: UnitCircleGrid
    total_mass: float

    @classmethod
    def from_samples(cls, samples) -> "MeasureDensity":
        values = np.asarray(samples, dtype=float)
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise InputError("density samples must be finite and nonnegative")
        grid = UnitCircleGrid(values.size, values)
        return cls(grid, float(np.mean(values)))

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.grid.samples).real

    @property
    def M(self) -> int:
        return self.grid.M

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """``int f conj(g) w`` for sampled ``f`` and ``g``."""
        return complex(np.mean(f * np.conj(g) * self.values))

    def to_json(self) -> dict:
        return {"M": self.M, "total_mass": self.total_mass, "samples": self.values.tolist()}

    def csv_rows(self):
        theta = 2 * np.pi * np.arange(self.M) / self.M
        for t, v in zip(theta, self.values):
            yield (float(t), float(v), 0.0)


def half_line_values(F: CoefficientSequence) -> np.ndarray:
    """``[F_1, ..., F_L]`` for a sequence supported on ``n >= 1``."""
    if len(F) and F.start < 1:
        if np.any(F.values[: 1 - F.start] != 0):
            raise InputError("sequence must be supported on indices n >= 1")
        F = F.restrict(1, F.stop - 1)
    if len(F) == 0:
        return np.zeros(0, dtype=complex)
    return np.array([F[n] for n in range(1, F.stop)], dtype=complex)


def _entry(values: np.ndarray, i: int) -> complex:
    return complex(values[i - 1]) if 1 <= i <= values.size else 0j


def measure_grid_size(F: CoefficientSequence) -> int:
    """``max(8192, 16 L^2, 40 / delta)`` rounded up to a power of two.

    ``delta`` is the distance from the circle to the nearest zero of
    ``phi_L``; the density peaks there with width about ``delta``, and the
    trapezoid error decays like ``exp(-M delta)``.
    """
    values = half_line_values(F)
    L = max(values.size, 1)
    need = max(MIN_MEASURE_GRID, 16 * L * L)
    if values.size and np.any(values != 0):
        phi = orthogonal_polys(CoefficientSequence(1, values), values.size)[-1]
        zeros = roots(phi.dense(0, values.size))
        if zeros.size:
            delta = max(1.0 - float(np.max(np.abs(zeros))), 1e-300)
            need = max(need, PEAK_RESOLUTION / delta)
    return min(next_power_of_two(int(min(need, MAX_MEASURE_GRID))), MAX_MEASURE_GRID)


def herglotz_m(p: SU11Pair, z):
    """``(1 - r) / (1 + r)`` with ``r = b / a*``, evaluated at points of the disc."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise InputError("herglotz_m needs points inside the unit disc")
    r = reflection_quotient(p)
    values = np.asarray(r(z), dtype=complex)
    out = (1 - values) / (1 + values)
    return complex(out) if out.ndim == 0 else out


def density_from_pair(p: SU11Pair, M: int) -> MeasureDensity:
    """``1 / |a + b*|^2`` on the ``M``-point grid."""
    a, b = p.samples(M)
    denom = np.abs(a + np.conj(b)) ** 2
    if not np.all(np.isfinite(denom)) or np.min(denom) <= 1e-300:
        raise DenominatorVanishes("a + b* vanishes on the grid")
    return MeasureDensity.from_samples(1.0 / denom)


def measure_density_finite(F: CoefficientSequence, M: Optional[int] = None) -> MeasureDensity:
    """Density of the orthogonality measure of a finite half-line sequence."""
    values = half_line_values(F)
    seq = CoefficientSequence(1, values)
    return density_from_pair(nlft_finite(seq), M or measure_grid_size(seq))


def _poly(coeffs: np.ndarray) -> LaurentPolynomial:
    return LaurentPolynomial(0, coeffs, trim=False)


def reversed_star(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients of ``z^n phi*`` for a degree-``n`` coefficient vector."""
    return np.conj(coeffs[::-1])


def orthogonal_polys(F: CoefficientSequence, N: int) -> list[LaurentPolynomial]:
    """``phi_0, ..., phi_N`` with ``phi_n = z^n (a_n + b_n*)``."""
    values = half_line_values(F)
    pair = SU11Pair.identity()
    out = [_poly(np.ones(1))]
    for n in range(1, N + 1):
        f = _entry(values, n)
        if f != 0:
            pair = _laurent_product(pair, transfer_matrix(f, n))
        a, b = pair.a, pair.b
        # a + b* spans exponents -n..0; multiplying by z^n gives degrees 0..n.
        dense = a.dense(-n, 0) + b.star().dense(-n, 0)
        out.append(_poly(dense))
    return out


def _laurent_product(L: SU11Pair, R: SU11Pair) -> SU11Pair:
    a, b, c, d = L.a, L.b, R.a, R.b
    return SU11Pair(a * c + b * d.star(), a * d + b * c.star())


def recursion_defects(F: CoefficientSequence, N: int) -> dict:
    """Largest coefficient defects of the three polynomial recursions up to degree ``N``.

    ``forward``: ``z phi_n = rho_{n+1} phi_{n+1} - conj(F_{n+1}) z^n phi_n*``;
    ``backward``: ``phi_n = rho_n z phi_{n-1} + conj(F_n) z^n phi_n*``;
    ``star``: ``z^n phi_n* = rho_n z^{n-1} phi_{n-1}* + F_n phi_n``, the
    star image of ``backward``.
    """
    values = half_line_values(F)
    phis = [p.dense(0, k) for k, p in enumerate(orthogonal_polys(F, N + 1))]
    worst = {"forward": 0.0, "backward": 0.0, "star": 0.0}
    for n in range(N + 1):
        f1 = _entry(values, n + 1)
        rho1 = np.sqrt(1 - abs(f1) ** 2)
        lhs = np.concatenate([[0], phis[n]])
        rhs = rho1 * phis[n + 1] - np.conj(f1) * np.concatenate([reversed_star(phis[n]), [0]])
        worst["forward"] = max(worst["forward"], float(np.max(np.abs(lhs - rhs))))
        if n >= 1:
            f = _entry(values, n)
            rho = np.sqrt(1 - abs(f) ** 2)
            shifted = np.concatenate([[0], phis[n - 1]])
            back = rho * shifted + np.conj(f) * reversed_star(phis[n])
            worst["backward"] = max(worst["backward"], float(np.max(np.abs(phis[n] - back))))
            star_rhs = rho * np.concatenate([reversed_star(phis[n - 1]), [0]]) + f * phis[n]
            worst["star"] = max(worst["star"], float(np.max(np.abs(reversed_star(phis[n]) - star_rhs))))
    return worst


def hessenberg_entries(F: CoefficientSequence, N: int) -> HessenbergBand:
    """Leading ``N x N`` band of the Hessenberg matrix from the closed formulas."""
    values = half_line_values(F)
    diag = np.zeros(N, dtype=complex)
    if N:
        diag[0] = -np.conj(_entry(values, 1))
    for i in range(1, N):
        diag[i] = -_entry(values, i) * np.conj(_entry(values, i + 1))
    sub = np.array([np.sqrt(1 - abs(_entry(values, i)) ** 2) for i in range(1, N)])
    return HessenbergBand(diag, sub)


@dataclass(frozen=True, eq=False)
class GramSchmidtResult:
    """Orthonormal polynomials and the matrix of ``f -> z f`` in their basis."""

    polynomials: list
    matrix: np.ndarray
    samples: np.ndarray = field(repr=False)

    def band(self, N: int) -> HessenbergBand:
        H = self.matrix
        return HessenbergBand(np.diag(H)[:N].copy(), np.diag(H, -1)[: N - 1].real.copy())


def gram_schmidt_oracle(w: MeasureDensity, N: int) -> GramSchmidtResult:
    """Modified Gram-Schmidt on ``1, z, ..., z^N`` under ``<f, g> = int f conj(g) w``.

    Each vector is orthogonalized twice against the previous ones.  The
    returned matrix is ``H[i, j] = <z phi_j, phi_i>`` for ``i, j <= N``.
    """
    z = UnitCircleGrid.nodes(w.M)
    Q = np.zeros((N + 1, w.M), dtype=complex)
    C = np.zeros((N + 1, N + 1), dtype=complex)  # row n: monomial coefficients of phi_n
    for n in range(N + 1):
        v = z ** n
        coeffs = np.zeros(N + 1, dtype=complex)
        coeffs[n] = 1.0
        start = np.sqrt(w.inner(v, v).real)
        for _ in range(2):
            for k in range(n):
                proj = w.inner(v, Q[k])
                v = v - proj * Q[k]
                coeffs = coeffs - proj * C[k]
        norm = np.sqrt(w.inner(v, v).real)
        if not norm > 1e-12 * start:
            raise RankDeficient(f"monomial z^{n} is dependent on lower degrees under this measure")
        Q[n] = v / norm
        C[n] = coeffs / norm
    H = (np.conj(Q) * w.values) @ (z * Q).T / w.M
    polys = [_poly(C[n, : n + 1]) for n in range(N + 1)]
    return GramSchmidtResult(polys, H, Q)


def gram_matrix(polys: list, w: MeasureDensity) -> np.ndarray:
    """``<phi_j, phi_i>`` under the density ``w``."""
    z = UnitCircleGrid.nodes(w.M)
    V = np.array([np.asarray(p(z)) for p in polys])
    return (np.conj(V) * w.values) @ V.T / w.M


@dataclass(frozen=True)
class SzegoReport:
    lhs: float
    rhs: float
    product: float
    cauchy_gap: float
    degree: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _prediction_error(w: MeasureDensity, D: int) -> float:
    """``min int |1 - f|^2 w`` over polynomials ``f`` of degree ``<= D`` with ``f(0) = 0``.

    The least-squares problem is solved through its normal equations, whose
    matrix is the Toeplitz matrix of the grid moments of ``w``.
    """
    if D == 0:
        return float(w.total_mass)
    moments = np.fft.fft(w.values) / w.M  # entry k: int z^{-k} w
    Q = lambda k: moments[(-k) % w.M]  # noqa: E731  int z^k w
    idx = np.arange(1, D + 1)
    G = Q(idx[None, :] - idx[:, None])  # G[j, k] = <z^k, z^j>
    h = Q(-idx)  # <1, z^j>
    try:
        factor = cho_factor(G)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient("moment matrix is not positive definite on this grid") from exc
    coef = cho_solve(factor, h)
    return float((Q(0) - np.vdot(h, coef)).real)


def szego_check(F: CoefficientSequence, D: int, M: Optional[int] = None) -> SzegoReport:
    """Prediction error at degree ``D`` against ``exp int log w`` and ``prod (1 - |F_n|^2)``.

    ``cauchy_gap`` is ``lhs(D) - lhs(2D)``.
    """
    w = measure_density_finite(F, M)
    lhs = _prediction_error(w, D)
    values = half_line_values(F)
    return SzegoReport(
        lhs=lhs,
        rhs=float(np.exp(np.mean(np.log(w.values)))),
        product=float(np.prod(1 - np.abs(values) ** 2)),
        cauchy_gap=lhs - _prediction_error(w, 2 * D),
        degree=D,
    )


@dataclass(frozen=True, eq=False)
class BochnerReport:
    moments: np.ndarray  # Q_{-K} .. Q_K
    min_form: float
    min_eigenvalue: float
    max_ratio: float
    passed: bool

    def to_json(self) -> dict:
        return {"moments": [[q.real, q.imag] for q in self.moments], "min_form": self.min_form,
                "min_eigenvalue": self.min_eigenvalue, "max_ratio": self.max_ratio,
                "pass": self.passed}


def bochner_check(mu: MeasureDensity, K: int, trials: int = 1000, seed: int = 0,
                  tol: float = 1e-10) -> BochnerReport:
    """Moments ``Q_n = int z^n dmu`` and random real quadratic forms ``sum Q(n-m) g_n g_m``."""
    spectrum = np.fft.fft(mu.values) / mu.M  # entry k is int z^{-k} w
    ks = np.arange(-K, K + 1)
    Q = spectrum[(-ks) % mu.M]
    T = np.array([[Q[(n - m) + K] for m in range(K + 1)] for n in range(K + 1)])
    rng = np.random.default_rng(seed)
    gammas = rng.standard_normal((trials, K + 1))
    forms = np.einsum("tn,nm,tm->t", gammas, T, gammas).real
    q0 = Q[K].real
    ratio = float(np.max(np.abs(Q)) / q0) if q0 > 0 else np.inf
    min_eig = float(np.min(np.linalg.eigvalsh((T + T.conj().T) / 2)))
    passed = bool(np.min(forms) >= -tol and ratio <= 1 + 1e-12)
    return BochnerReport(Q, float(np.min(forms)), min_eig, ratio, passed)
