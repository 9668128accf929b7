"""SU(1,1) transform data (a, b), coefficient sequences and the pair algebra.

A pair stands for the matrix ``[[a, b], [b*, a*]]``; only the first row is
stored.  The product of two pairs is the first row of the matrix product:

    (a, b)(c, d) = (a c + b d*, a d + b c*)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import InputError, ModulusAtLeastOne, RepresentationMismatch
from .laurent_core import LaurentPolynomial, RationalFunction, UnitCircleGrid, sample

SEQUENCE_MODULUS_LIMIT = 1 - 1e-14

Function = Union[LaurentPolynomial, RationalFunction, UnitCircleGrid]

_KIND = {LaurentPolynomial: "laurent", RationalFunction: "rational", UnitCircleGrid: "grid"}


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """Values ``F_n`` for ``n = start, ..., start + len(values) - 1``; zero elsewhere."""

    start: int
    values: np.ndarray

    def __init__(self, start: int = 0, values=()):
        arr = np.array(values, dtype=complex).reshape(-1)
        if arr.size and np.max(np.abs(arr)) >= SEQUENCE_MODULUS_LIMIT:
            bad = int(np.argmax(np.abs(arr)))
            raise ModulusAtLeastOne(
                f"|F_{start + bad}| = {abs(arr[bad]):.16g} is not below 1 - 1e-14")
        arr.setflags(write=False)
        object.__setattr__(self, "start", int(start))
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    @property
    def stop(self) -> int:
        """One past the last stored index."""
        return self.start + self.values.size

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.stop)

    def __getitem__(self, n: int) -> complex:
        if self.start <= n < self.stop:
            return complex(self.values[n - self.start])
        return 0j

    def support(self) -> Optional[tuple[int, int]]:
        """First and last index carrying a nonzero value, or None."""
        nz = np.nonzero(self.values)[0]
        if nz.size == 0:
            return None
        return self.start + int(nz[0]), self.start + int(nz[-1])

    def trimmed(self) -> "CoefficientSequence":
        window = self.support()
        if window is None:
            return CoefficientSequence(0, [])
        return self.restrict(*window)

    def restrict(self, lo: int, hi: int) -> "CoefficientSequence":
        """Entries with ``lo <= n <= hi`` (the window may exceed the stored range)."""
        if hi < lo:
            return CoefficientSequence(lo, [])
        return CoefficientSequence(lo, [self[n] for n in range(lo, hi + 1)])

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.values.imag) <= tol))

    def to_json(self) -> dict:
        return {"start": self.start, "values": [[v.real, v.imag] for v in self.values]}

    @classmethod
    def from_json(cls, data: dict) -> "CoefficientSequence":
        values = []
        for v in data["values"]:
            values.append(complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v))
        return cls(int(data.get("start", 0)), values)


@dataclass(frozen=True, eq=False)
class SU11Pair:
    """First row ``(a, b)`` of an SU(1,1)-valued function on the circle.

    Both entries share one representation.  Grid pairs may carry ``a(inf)``
    from their producer; otherwise the sample mean is used.
    """

    a: Function
    b: Function
    a_infinity: Optional[float] = None

    def __post_init__(self):
        ka = _KIND.get(type(self.a))
        kb = _KIND.get(type(self.b))
        if ka is None or ka != kb:
            raise RepresentationMismatch(
                f"a and b must share a representation, got {type(self.a).__name__} "
                f"and {type(self.b).__name__}")
        if ka == "grid" and self.a.M != self.b.M:
            raise RepresentationMismatch(f"grid sizes differ: {self.a.M} vs {self.b.M}")

    @property
    def kind(self) -> str:
        return _KIND[type(self.a)]

    @classmethod
    def identity(cls) -> "SU11Pair":
        return cls(LaurentPolynomial.constant(1.0), LaurentPolynomial.zero())

    def samples(self, M: int) -> tuple[np.ndarray, np.ndarray]:
        """Values of ``a`` and ``b`` on the ``M``-point circle grid."""
        if self.kind == "grid":
            if self.a.M != M:
                raise RepresentationMismatch(f"grid pair has M={self.a.M}, requested {M}")
            return np.asarray(self.a.samples), np.asarray(self.b.samples)
        return np.asarray(sample(self.a, M).samples), np.asarray(sample(self.b, M).samples)

    def a_at_infinity(self) -> float:
        if self.kind == "grid":
            if self.a_infinity is not None:
                return float(self.a_infinity)
            return float(np.mean(self.a.samples).real)
        return float(np.real(self.a.value_at_infinity()))

    def as_rational(self) -> "SU11Pair":
        if self.kind == "rational":
            return self
        if self.kind == "laurent":
            return SU11Pair(self.a.to_rational(), self.b.to_rational())
        raise RepresentationMismatch("grid pairs have no rational form")

    def as_grid(self, M: int) -> "SU11Pair":
        if self.kind == "grid" and self.a.M == M:
            return self
        a, b = self.samples(M)
        return SU11Pair(UnitCircleGrid(M, a), UnitCircleGrid(M, b), self.a_at_infinity())

    def to_json(self) -> dict:
        out = {"repr": self.kind, "a": self.a.to_json(), "b": self.b.to_json()}
        if self.kind == "grid" and self.a_infinity is not None:
            out["a_infinity"] = self.a_infinity
        return out

    @classmethod
    def from_json(cls, data: dict) -> "SU11Pair":
        kind = data.get("repr", "laurent")
        loader = {"laurent": LaurentPolynomial, "rational": RationalFunction,
                  "grid": UnitCircleGrid}.get(kind)
        if loader is None:
            raise InputError(f"unknown pair representation {kind!r}")
        return cls(loader.from_json(data["a"]), loader.from_json(data["b"]),
                   data.get("a_infinity"))


def _same_kind(L: SU11Pair, R: SU11Pair) -> tuple[SU11Pair, SU11Pair]:
    if L.kind == R.kind:
        if L.kind == "grid" and L.a.M != R.a.M:
            raise RepresentationMismatch(f"grid sizes differ: {L.a.M} vs {R.a.M}")
        return L, R
    kinds = {L.kind, R.kind}
    if kinds == {"laurent", "rational"}:
        return L.as_rational(), R.as_rational()
    raise RepresentationMismatch(f"cannot multiply {L.kind} and {R.kind} pairs")


def pair_product(L: SU11Pair, R: SU11Pair) -> SU11Pair:
    """``(a, b)(c, d) = (ac + b d*, ad + b c*)``.

    Laurent and rational operands are combined in rational form; any pairing
    with a grid operand requires a grid of the same size.
    """
    L, R = _same_kind(L, R)
    if L.kind == "grid":
        a, b = L.a.samples, L.b.samples
        c, d = R.a.samples, R.b.samples
        M = L.a.M
        a_inf = None
        if L.a_infinity is not None and R.a_infinity is not None:
            a_inf = L.a_infinity * R.a_infinity
        return SU11Pair(UnitCircleGrid(M, a * c + b * np.conj(d)),
                        UnitCircleGrid(M, a * d + b * np.conj(c)), a_inf)
    a, b, c, d = L.a, L.b, R.a, R.b
    return SU11Pair(a * c + b * d.star(), a * d + b * c.star())


def pair_inverse(p: SU11Pair) -> SU11Pair:
    """``(a*, -b)``, the first row of the inverse matrix."""
    if p.kind == "grid":
        return SU11Pair(UnitCircleGrid(p.a.M, np.conj(p.a.samples)),
                        UnitCircleGrid(p.b.M, -p.b.samples), p.a_infinity)
    return SU11Pair(p.a.star(), -p.b)


def transfer_matrix(F: complex, n: int) -> SU11Pair:
    """``(1 - |F|^2)^(-1/2) (1, F z^n)``."""
    F = complex(F)
    if abs(F) >= 1:
        raise ModulusAtLeastOne(f"|F| = {abs(F)} is not below 1")
    c = 1.0 / np.sqrt(1.0 - abs(F) ** 2)
    return SU11Pair(LaurentPolynomial.constant(c), LaurentPolynomial.monomial(c * F, n))


def unimodularity_defect(p: SU11Pair, M: int = 1024) -> float:
    """``max |a a* - b b* - 1|`` over the grid."""
    a, b = p.samples(M)
    return float(np.max(np.abs(np.abs(a) ** 2 - np.abs(b) ** 2 - 1.0)))


def operator_norm_at(p: SU11Pair, z: complex) -> float:
    """Operator norm ``|a(z)| + |b(z)|`` of the matrix at a point of the circle."""
    z = complex(z)
    if abs(abs(z) - 1) > 1e-12:
        raise InputError(f"|z| = {abs(z)} is not 1")
    if p.kind == "grid":
        raise RepresentationMismatch("point evaluation needs a Laurent or rational pair")
    return float(abs(p.a(z)) + abs(p.b(z)))


def h_distance(p: SU11Pair, q: SU11Pair, M: int = 4096) -> float:
    """Quasi-metric ``int |log|a| - log|a'|| + int |b/|a| - b'/|a'||^2`` by grid quadrature."""
    a1, b1 = p.samples(M)
    a2, b2 = q.samples(M)
    m1, m2 = np.abs(a1), np.abs(a2)
    first = np.mean(np.abs(np.log(m1) - np.log(m2)))
    second = np.mean(np.abs(b1 / m1 - b2 / m2) ** 2)
    return float(first + second)


def random_sequence(rng: np.random.Generator, window: int, max_modulus: float,
                    real: bool = False, start: Optional[int] = None) -> CoefficientSequence:
    """A random sequence of length ``1..window`` with entries of modulus ``<= max_modulus``.

    Moduli and phases are uniform; real sequences are uniform on
    ``[-max_modulus, max_modulus]``.  The start is uniform in
    ``[-window // 2, window // 2]`` unless given.
    """
    length = int(rng.integers(1, window + 1))
    if start is None:
        start = int(rng.integers(-(window // 2), window // 2 + 1))
    if real:
        values = rng.uniform(-max_modulus, max_modulus, length)
    else:
        values = rng.uniform(0, max_modulus, length) * np.exp(2j * np.pi * rng.uniform(size=length))
    return CoefficientSequence(start, values)


def random_batch(count: int, window: int, max_modulus: float, seed: int = 0,
                 real: bool = False, start: Optional[int] = None) -> list[CoefficientSequence]:
    """``count`` sequences from :func:`random_sequence` with a seeded generator."""
    rng = np.random.default_rng(seed)
    return [random_sequence(rng, window, max_modulus, real, start) for _ in range(count)]
