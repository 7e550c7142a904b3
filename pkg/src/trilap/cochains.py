"""Complex-valued cochains and the weighted inner products.

A ``k``-cochain stores one complex value per canonical ``k``-simplex.  The
value on another orientation is recovered from the permutation parity, so
``phi(-e) = -phi(e)`` and ``psi(-w) = -psi(w)`` hold by construction.

Inner products are sums over canonical representatives.  They coincide with
the half-sum over all oriented edges and the sixth-sum over all six vertex
orderings of a face, because every orientation carries the same
``weight * |value|**2`` term.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from .complex import ComplexError, Triangulation, UnknownSimplex


class ComplexMismatch(ComplexError):
    pass


class Cochain:
    """Immutable ``k``-cochain on a triangulation."""

    __slots__ = ("complex", "degree", "values")

    def __init__(self, cx: Triangulation, degree: int, values):
        if degree not in (0, 1, 2):
            raise ValueError("degree must be 0, 1 or 2")
        vals = np.array(values, dtype=complex).reshape(-1)
        if vals.shape[0] != cx.size(degree):
            raise ValueError(f"{degree}-cochain needs {cx.size(degree)} values, "
                             f"got {vals.shape[0]}")
        vals.setflags(write=False)
        object.__setattr__(self, "complex", cx)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "values", vals)

    def __setattr__(self, name, value):
        raise AttributeError("cochains are immutable")

    @classmethod
    def zeros(cls, cx: Triangulation, degree: int) -> Cochain:
        return cls(cx, degree, np.zeros(cx.size(degree), dtype=complex))

    @classmethod
    def from_dict(cls, cx: Triangulation, degree: int,
                  entries: Mapping) -> Cochain:
        """Build from ``{simplex: value}``; oriented keys are sign-adjusted.

        Entries naming the same simplex accumulate.
        """
        vals = np.zeros(cx.size(degree), dtype=complex)
        for key, value in entries.items():
            k, sign = _locate(cx, degree, key)
            vals[k] += sign * value
        return cls(cx, degree, vals)

    def __call__(self, *simplex: int) -> complex:
        k, sign = _locate(self.complex, self.degree, simplex)
        return sign * complex(self.values[k])

    def _check(self, other: Cochain):
        if not isinstance(other, Cochain):
            return NotImplemented
        if other.complex is not self.complex or other.degree != self.degree:
            raise ComplexMismatch("cochains live on different spaces")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Cochain(self.complex, self.degree, self.values + other.values)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Cochain(self.complex, self.degree, self.values - other.values)

    def __neg__(self):
        return Cochain(self.complex, self.degree, -self.values)

    def __mul__(self, scalar):
        if isinstance(scalar, (Cochain, np.ndarray)):
            return NotImplemented
        return Cochain(self.complex, self.degree, scalar * self.values)

    __rmul__ = __mul__

    def scaled_by(self, field: SimplexField | np.ndarray) -> Cochain:
        """Pointwise product with an orientation-free scalar field."""
        w = field.values if isinstance(field, SimplexField) else np.asarray(field)
        return Cochain(self.complex, self.degree, w * self.values)

    def support(self) -> list[tuple[int, ...]]:
        simp = self.complex.simplices(self.degree)
        return [simp[k] for k in np.flatnonzero(self.values)]

    def __repr__(self) -> str:
        nnz = int(np.count_nonzero(self.values))
        return f"Cochain(k={self.degree}, nnz={nnz}, on {self.complex!r})"


@dataclass(frozen=True)
class SimplexField:
    """Orientation-free scalar per canonical simplex (e.g. edge averages)."""

    complex: Triangulation
    degree: int
    values: np.ndarray

    def __call__(self, *simplex: int) -> complex:
        k, _ = _locate(self.complex, self.degree, simplex)
        return complex(self.values[k])


def _locate(cx: Triangulation, degree: int, key) -> tuple[int, int]:
    key = tuple(key) if isinstance(key, (tuple, list)) else (key,)
    if len(key) != degree + 1:
        raise UnknownSimplex(f"{key!r} is not a {degree}-simplex")
    if degree == 0:
        return cx.vindex(key[0]), 1
    if degree == 1:
        return cx.edge_sign(*key)
    return cx.face_sign(*key)


def eval0(f: Cochain, x: int) -> complex:
    return f(x)


def eval1(phi: Cochain, tail: int, head: int) -> complex:
    return phi(tail, head)


def eval2(psi: Cochain, x: int, y: int, z: int) -> complex:
    return psi(x, y, z)


def _inner(a: Cochain, b: Cochain, degree: int) -> complex:
    if a.degree != degree or b.degree != degree:
        raise ComplexMismatch(f"expected two {degree}-cochains")
    if a.complex is not b.complex:
        raise ComplexMismatch("cochains live on different complexes")
    w = a.complex.weights(degree)
    return complex(np.sum(w * a.values * np.conj(b.values)))


def inner0(f: Cochain, g: Cochain) -> complex:
    return _inner(f, g, 0)


def inner1(phi: Cochain, psi: Cochain) -> complex:
    return _inner(phi, psi, 1)


def inner2(psi1: Cochain, psi2: Cochain) -> complex:
    return _inner(psi1, psi2, 2)


def inner(a: Cochain, b: Cochain) -> complex:
    return _inner(a, b, a.degree)


def norm(a: Cochain) -> float:
    return float(np.sqrt(inner(a, a).real))


@dataclass(frozen=True)
class TripleField:
    """Element ``(f, phi, psi)`` of ``l2(V) + l2(E) + l2(F)``."""

    f: Cochain
    phi: Cochain
    psi: Cochain

    def __post_init__(self):
        degrees = (self.f.degree, self.phi.degree, self.psi.degree)
        if degrees != (0, 1, 2):
            raise ComplexMismatch(f"component degrees {degrees} != (0, 1, 2)")
        cx = self.f.complex
        if self.phi.complex is not cx or self.psi.complex is not cx:
            raise ComplexMismatch("components live on different complexes")

    @property
    def complex(self) -> Triangulation:
        return self.f.complex

    @classmethod
    def zeros(cls, cx: Triangulation) -> TripleField:
        return cls(Cochain.zeros(cx, 0), Cochain.zeros(cx, 1),
                   Cochain.zeros(cx, 2))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.f.values, self.phi.values, self.psi.values])

    @classmethod
    def from_vector(cls, cx: Triangulation, vec) -> TripleField:
        nv, ne = cx.n_vertices, cx.n_edges
        vec = np.asarray(vec)
        return cls(Cochain(cx, 0, vec[:nv]), Cochain(cx, 1, vec[nv:nv + ne]),
                   Cochain(cx, 2, vec[nv + ne:]))

    def __add__(self, other: TripleField) -> TripleField:
        return TripleField(self.f + other.f, self.phi + other.phi,
                           self.psi + other.psi)


def h_inner(a: TripleField, b: TripleField) -> complex:
    return inner0(a.f, b.f) + inner1(a.phi, b.phi) + inner2(a.psi, b.psi)


def h_norm(F: TripleField) -> float:
    return float(np.sqrt(h_inner(F, F).real))


def random_cochain(cx: Triangulation, degree: int,
                   support: Iterable | None = None, seed: int = 42) -> Cochain:
    """Seeded complex Gaussian values on ``support`` (all simplices if None).

    Support entries may be given in any orientation; only membership matters.
    """
    rng = np.random.default_rng(seed)
    n = cx.size(degree)
    if support is None:
        idx = np.arange(n)
    else:
        idx = np.array(sorted({_locate(cx, degree, s)[0] for s in support}),
                       dtype=np.int64)
    vals = np.zeros(n, dtype=complex)
    vals[idx] = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
    return Cochain(cx, degree, vals)


def random_triple(cx: Triangulation, seed: int = 42) -> TripleField:
    rng = np.random.default_rng(seed)
    s0, s1, s2 = (int(x) for x in rng.integers(0, 2**31, size=3))
    return TripleField(random_cochain(cx, 0, seed=s0),
                       random_cochain(cx, 1, seed=s1),
                       random_cochain(cx, 2, seed=s2))
