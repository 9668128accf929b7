"""Real half-line transform data and Jacobi matrices.

A real sequence ``F`` on ``n >= 1`` gives a circle measure symmetric under
``z -> conj(z)``; the map ``y = w + 1/w`` pushes it onto ``[-2, 2]``.  The
Jacobi matrix of the pushed measure has closed-form entries in ``F``.  This
module provides those formulas, the push-forward on a Gauss-Chebyshev grid,
an independent Gram-Schmidt oracle on the real line and the resolvent check
of the Stieltjes function against the reflection quotient.

Diagonal sign: the matrix of ``f -> y f`` for the pushed measure has
``J_00 = -2 F_1`` and ``J_nn = -(F_{2n+1}(1 + F_{2n}) - F_{2n-1}(1 - F_{2n}))``.
The opposite global sign describes the reflected measure ``y -> -y``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import (AsymmetricInput, InputError, NonRealInput, RankDeficient, SpectrumTooClose,
                     ValueOutOfRange)
from .forward_nlft import nlft_finite
from .inverse_nlft import reflection_quotient
from .laurent_core import UnitCircleGrid
from .opuc_bridge import MeasureDensity, half_line_values, measure_density_finite, orthogonal_polys
from .su11_pairs import CoefficientSequence, SU11Pair

CALIBRATION_POINT = 0.2
SPECTRUM_MARGIN = 0.5
RESOLVENT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class JacobiMatrix:
    """Real diagonal and strictly positive off-diagonal of a tridiagonal matrix."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float).copy()
        off = np.asarray(self.offdiag, dtype=float).copy()
        if off.size and np.min(off) <= 0:
            raise InputError("off-diagonal entries must be strictly positive")
        if diag.size and off.size != diag.size - 1:
            raise InputError(f"{diag.size} diagonal entries need {diag.size - 1} off-diagonal ones")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", off)

    @property
    def size(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def corner_resolvent(self, y: complex) -> complex:
        """``<(J - y)^{-1} e_0, e_0>`` by a banded solve."""
        S = self.size
        bands = np.zeros((3, S), dtype=complex)
        bands[0, 1:] = self.offdiag
        bands[1] = self.diag - y
        bands[2, :-1] = self.offdiag
        rhs = np.zeros(S, dtype=complex)
        rhs[0] = 1.0
        return complex(solve_banded((1, 1), bands, rhs)[0])

    def to_json(self) -> dict:
        return {"diag": self.diag.tolist(), "offdiag": self.offdiag.tolist()}


def real_values(F: CoefficientSequence, tol: float = 1e-14) -> np.ndarray:
    """``[F_1, ..., F_L]`` as reals, checking realness and range."""
    values = half_line_values(F)
    if np.any(np.abs(values.imag) > tol):
        raise NonRealInput("the Jacobi dictionary needs a real sequence")
    values = values.real
    if np.any(np.abs(values) >= 1):
        raise ValueOutOfRange("entries must lie in (-1, 1)")
    return values


def _term(values: np.ndarray, i: int) -> float:
    if i == 0:
        return 1.0
    return float(values[i - 1]) if i <= values.size else 0.0


def jacobi_from_F(F: CoefficientSequence, N: int) -> JacobiMatrix:
    """Leading ``N x N`` Jacobi matrix of the pushed-forward measure from closed formulas."""
    v = real_values(F)
    f = lambda i: _term(v, i)  # noqa: E731
    diag = np.zeros(N)
    off = np.zeros(max(N - 1, 0))
    if N:
        diag[0] = -2.0 * f(1)
    for n in range(1, N):
        diag[n] = -(f(2 * n + 1) * (1 + f(2 * n)) - f(2 * n - 1) * (1 - f(2 * n)))
    for n in range(N - 1):
        if n == 0:
            off[0] = np.sqrt(2.0 * (1 - f(1) ** 2) * (1 - f(2)))
        else:
            off[n] = np.sqrt((1 + f(2 * n)) * (1 - f(2 * n + 1) ** 2) * (1 - f(2 * n + 2)))
    return JacobiMatrix(diag, off)


@dataclass(frozen=True, eq=False)
class LineDensity:
    """A measure on ``[-2, 2]`` sampled at Gauss-Chebyshev nodes.

    ``density[k]`` is the density at ``y[k]`` and ``weights[k]`` the quadrature
    weight, so ``int f dmu = sum f(y) density weights``.
    """

    y: np.ndarray
    density: np.ndarray
    weights: np.ndarray

    @property
    def masses(self) -> np.ndarray:
        return self.density * self.weights

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(values * self.masses))

    def moments(self, count: int) -> np.ndarray:
        return np.array([self.integrate(self.y ** k) for k in range(count)])

    def csv_rows(self):
        for y, d in zip(self.y, self.density):
            yield (float(y), float(d))

    @classmethod
    def arcsine(cls, K: int) -> "LineDensity":
        """``1 / (pi sqrt(4 - y^2))`` on ``K`` nodes."""
        theta = np.pi * (np.arange(K) + 0.5) / K
        y = 2 * np.cos(theta)
        root = np.sqrt(4 - y ** 2)
        return cls(y, 1.0 / (np.pi * root), np.pi * root / K)


def half_shift(grid: UnitCircleGrid) -> np.ndarray:
    """Trigonometric interpolation of the samples at ``exp(2 pi i (j + 1/2) / M)``."""
    M = grid.M
    spectrum = np.fft.fft(grid.samples)
    k = np.fft.fftfreq(M, d=1.0 / M)
    phase = np.exp(1j * np.pi * k / M)
    if M % 2 == 0:
        phase[M // 2] = np.cos(np.pi / 2)  # split Nyquist term: real average of +-M/2
    return np.fft.ifft(spectrum * phase)


def joukowski_pushforward(wprime: MeasureDensity, tol: float = 1e-9) -> LineDensity:
    """Push a symmetric circle density onto ``[-2, 2]`` through ``y = w + 1/w``.

    The density is interpolated to the half-shifted circle nodes, whose upper
    half maps to the ``M/2`` Gauss-Chebyshev nodes; this keeps the endpoint
    singularity of ``1 / sqrt(4 - y^2)`` off the grid and matches every
    moment that the circle trapezoid rule integrates exactly.
    """
    values = wprime.values
    mirrored = np.roll(values[::-1], 1)
    if np.max(np.abs(values - mirrored)) > tol * max(np.max(np.abs(values)), 1.0):
        raise AsymmetricInput("circle density is not symmetric under conjugation")
    M = wprime.M
    K = M // 2
    shifted = half_shift(wprime.grid).real[:K]
    theta = np.pi * (np.arange(K) + 0.5) / K
    y = 2 * np.cos(theta)
    root = np.sqrt(4 - y ** 2)
    return LineDensity(y, shifted / (np.pi * root), np.pi * root / K)


def circle_moments(wprime: MeasureDensity, count: int) -> np.ndarray:
    """``int (z + 1/z)^k w`` on the circle grid for ``k < count``."""
    y = 2 * np.cos(2 * np.pi * np.arange(wprime.M) / wprime.M)
    return np.array([np.mean(y ** k * wprime.values) for k in range(count)])


@dataclass(frozen=True, eq=False)
class LineGramSchmidt:
    matrix: JacobiMatrix
    polynomial_values: np.ndarray  # row n: q_n at the nodes
    leakage: float  # largest entry of <y q_j, q_i> outside the tridiagonal band


def moment_gram_schmidt_oracle(density: LineDensity, N: int) -> LineGramSchmidt:
    """Orthonormal polynomials in ``y`` under the quadrature and the matrix of ``f -> y f``.

    Each new vector is ``y q_n`` orthogonalized twice against all previous
    ones; it spans the same space as the next monomial and avoids the
    ill-conditioned monomial basis.
    """
    m = density.masses
    inner = lambda f, g: float(np.sum(f * g * m))  # noqa: E731
    Q = np.zeros((N + 1, density.y.size))
    start = np.sqrt(inner(np.ones_like(m), np.ones_like(m)))
    if not start > 0:
        raise RankDeficient("measure has zero mass")
    Q[0] = 1.0 / start
    for n in range(N):
        v = density.y * Q[n]
        scale = np.sqrt(inner(v, v))
        for _ in range(2):
            for k in range(n + 1):
                v = v - inner(v, Q[k]) * Q[k]
        norm = np.sqrt(inner(v, v))
        if not norm > 1e-12 * scale:
            raise RankDeficient(f"degree {n + 1} is dependent on lower degrees on this grid")
        Q[n + 1] = v / norm
    H = (Q * m) @ (density.y * Q).T
    S = N
    band = np.abs(np.triu(H[:S, :S], 2)) + np.abs(np.tril(H[:S, :S], -2))
    return LineGramSchmidt(JacobiMatrix(np.diag(H)[:S].copy(), np.diag(H, -1)[: S - 1].copy()),
                           Q, float(np.max(band, initial=0.0)))


def jacobi_oracle(F: CoefficientSequence, N: int, M: Optional[int] = None) -> LineGramSchmidt:
    """Oracle route: circle density, push-forward, then Gram-Schmidt on the line."""
    return moment_gram_schmidt_oracle(joukowski_pushforward(measure_density_finite(F, M)), N)


# -- Stieltjes function ------------------------------------------------------

def _check_point(w: complex) -> complex:
    w = complex(w)
    if not 0 < abs(w) <= 0.9:
        raise SpectrumTooClose(f"|w| = {abs(w):.3g} must lie in (0, 0.9]")
    y = w + 1 / w
    gap = abs(y.imag) if -2 <= y.real <= 2 else min(abs(y - 2), abs(y + 2))
    if gap < SPECTRUM_MARGIN:
        raise SpectrumTooClose(f"w + 1/w lies within {gap:.3g} of [-2, 2]")
    return y


def m_from_pair(p: SU11Pair, w: complex) -> complex:
    """``(1 / (w - 1/w)) (1 - r(w)) / (1 + r(w))`` with ``r = b / a*``."""
    r = complex(reflection_quotient(p)(complex(w)))
    return (1 - r) / (1 + r) / (w - 1 / w)


def stieltjes_corner(F: CoefficientSequence, y: complex, start: int = 64,
                     tol: float = RESOLVENT_TOL, limit: int = 1 << 16) -> tuple[complex, int]:
    """Corner resolvent entry of the Jacobi matrix, doubling its size until it settles."""
    S = start
    previous = jacobi_from_F(F, S).corner_resolvent(y)
    while S < limit:
        S *= 2
        current = jacobi_from_F(F, S).corner_resolvent(y)
        if abs(current - previous) < tol:
            return current, S
        previous = current
    raise SpectrumTooClose(f"resolvent did not settle below {tol} up to size {limit}")


def calibrated_constant() -> float:
    """``rhs / lhs`` at ``F = 0`` and ``w = 0.2``, with ``lhs = corner / pi``."""
    zero = CoefficientSequence(1, [])
    y = _check_point(CALIBRATION_POINT)
    corner, _ = stieltjes_corner(zero, y)
    rhs = m_from_pair(nlft_finite(zero), CALIBRATION_POINT)
    return float((rhs / (corner / np.pi)).real)


@dataclass(frozen=True)
class MCheckReport:
    w: complex
    lhs: complex
    rhs: complex
    constant: float
    size: int

    @property
    def deviation(self) -> float:
        return abs(self.constant * self.lhs - self.rhs)

    def to_json(self) -> dict:
        return {"w": [self.w.real, self.w.imag], "lhs": [self.lhs.real, self.lhs.imag],
                "rhs": [self.rhs.real, self.rhs.imag], "constant": self.constant,
                "constant_derivation": "rhs / lhs at F = 0, w = 0.2",
                "size": self.size, "deviation": self.deviation}


def jacobi_m_check(F: CoefficientSequence, w: complex, constant: Optional[float] = None) -> MCheckReport:
    """``lhs = (1/pi) <(J - y)^{-1} e_0, e_0>`` at ``y = w + 1/w`` against the pair formula."""
    y = _check_point(w)
    corner, S = stieltjes_corner(F, y)
    rhs = m_from_pair(nlft_finite(CoefficientSequence(1, real_values(F))), w)
    c = calibrated_constant() if constant is None else constant
    return MCheckReport(complex(w), corner / np.pi, rhs, c, S)


# -- normalization of the pushed polynomials -----------------------------------

def psi_values(F: CoefficientSequence, n: int, z: np.ndarray) -> np.ndarray:
    """``Psi_n = w^n (a_{2n} + b_{2n}*) + w^{-n} (a_{2n}* + b_{2n})`` at points of the circle."""
    phi = orthogonal_polys(F, 2 * n)[-1]
    psi = z ** (-n) * np.asarray(phi(z))
    return psi + np.conj(psi)


def psi_norms(F: CoefficientSequence, N: int, M: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    """Measured ``||Psi_n||^2`` for ``n <= N`` and the closed form ``2 (1 + F_{2n})`` with ``F_0 = 1``."""
    v = real_values(F)
    w = measure_density_finite(F, M)
    z = UnitCircleGrid.nodes(w.M)
    measured = np.array([np.mean(np.abs(psi_values(F, n, z)) ** 2 * w.values) for n in range(N + 1)])
    expected = np.array([2 * (1 + _term(v, 2 * n)) for n in range(N + 1)])
    return measured, expected


def pushed_polynomials(F: CoefficientSequence, N: int, density: LineDensity) -> np.ndarray:
    """``Phi_n = 2^{-1/2} (1 + F_{2n})^{-1/2} Psi_n`` at the line nodes, rows ``n = 0..N``."""
    v = real_values(F)
    z = np.exp(1j * np.arccos(density.y / 2))
    rows = []
    for n in range(N + 1):
        rows.append(psi_values(F, n, z).real / np.sqrt(2 * (1 + _term(v, 2 * n))))
    return np.array(rows)
