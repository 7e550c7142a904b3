"""Candidate solutions of ``(L + i) phi = 0`` on two growing families.

* ``L1`` on simple triangular trees: ``phi`` equals ``C_n`` on every edge
  from ``S_n`` to ``S_{n+1}`` (oriented outward) and vanishes on sibling
  edges.  Then ``d1 phi = 0`` and ``(L1 + i) phi = 0`` reduces to
  ``(off(n) + 1 + i) C_n - off(n+1) C_{n+1} - C_{n-1} = 0`` with
  ``C_{-1} = 0`` at the root.
* ``L2`` on :func:`~trilap.generators.bipartite_layer_family`: ``psi`` equals
  ``C_{2n}`` on every face whose apex lies in ``S_{2n}`` (oriented as
  ``[a, b, x]`` with ``a < b`` the odd edge), where the upper-face equation
  ``(#S_{2n+2} + 2 + i) C_{2n+2} + #S_{2n} C_{2n} = 0`` fixes the sequence.

The reports carry coefficients, recurrence residuals, layer masses, the
summability check and the residual of ``(L + i) phi`` on the interior of a
materialized truncation.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .cochains import Cochain, norm
from .complex import Triangulation
from .generators import (OffspringSpec, bipartite_layer_family,
                         triangular_tree)
from .operators import assemble

CONFIRMED, INCONCLUSIVE = "CandidateConfirmed", "Inconclusive"
RESIDUAL_TOL = 1e-10
RECURRENCE_TOL = 1e-12
TAIL_FRACTION = 1e-6


class SummabilityFails(ValueError):
    pass


class NoInteriorSimplices(ValueError):
    pass


@dataclass
class DeficiencyReport:
    operator: str
    indices: list[int]
    coefficients: list[complex]
    recurrence_residuals: list[float]
    summability_terms: list[float]
    partial_sums: list[float]
    hypothesis_holds: bool
    layer_mass: list[float]
    tail_index: int | None
    residual: float | None
    norm: float
    materialized_depth: int | None
    verdict: str
    tail_bounds: list[float] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "operator": self.operator,
            "coefficients": [{"index": n, "re": c.real, "im": c.imag}
                             for n, c in zip(self.indices, self.coefficients)],
            "recurrence_residuals": self.recurrence_residuals,
            "summability_terms": self.summability_terms,
            "partial_sums": self.partial_sums,
            "hypothesis_holds": self.hypothesis_holds,
            "layer_mass": self.layer_mass,
            "tail_bounds": self.tail_bounds,
            "tail_index": self.tail_index,
            "residual": self.residual,
            "norm": self.norm,
            "materialized_depth": self.materialized_depth,
            "verdict": self.verdict,
            "notes": self.notes,
        }

    def csv_rows(self) -> list[tuple[int, float]]:
        return [(n, abs(c)) for n, c in zip(self.indices, self.coefficients)]


def residual_scan(cx: Triangulation, op: str, phi: Cochain) -> float:
    """``max |((L + i) phi)(sigma)|`` over interior simplices.

    ``op`` names a Laplacian block (``L0``, ``L1``, ``L2``, ``L1-``,
    ``L1+``).  Interior simplices avoid the truncation rim, so the
    operator's stencil at them is the one of the untruncated family.
    """
    opm = assemble(cx, op)
    if opm.source != phi.degree or opm.target != phi.degree:
        raise ValueError(f"{op} does not act on {phi.degree}-cochains")
    mask = cx.interior_mask(phi.degree)
    if not mask.any():
        raise NoInteriorSimplices(
            f"truncation has no interior {phi.degree}-simplices")
    out = opm.matrix @ phi.values + 1j * phi.values
    return float(np.abs(out[mask]).max())


def _tail_index(mass: Sequence[float]) -> int | None:
    """Smallest ``d`` with ``sum_{n>d} mass_n < TAIL_FRACTION * total``."""
    total = float(sum(mass))
    if total <= 0:
        return None
    for d in range(len(mass) - 1):
        if float(sum(mass[d + 1:])) < TAIL_FRACTION * total:
            return d
    return None


def _as_float(v: int, what: str) -> float:
    try:
        return float(v)
    except OverflowError:
        raise OverflowError(
            f"{what} = 2^{int(v).bit_length() - 1}... does not fit in a double; "
            "reduce the depth") from None


# ---------------------------------------------------------------------------
# L1 on triangular trees
# ---------------------------------------------------------------------------

def l1_root_coefficients(off: Callable[[int], int]) -> tuple[float, float]:
    """Root equation ``a C_0 + b C_1 + i C_0 = 0`` as ``(a, b)``.

    Calibrated against :func:`calibrate_l1` on a depth-2 tree: there is no
    ``C_{-1}`` term, ``a = off(0) + 1`` and ``b = -off(1)``.
    """
    return off(0) + 1.0, -float(off(1))


def _layer_forms(cx: Triangulation, k: int) -> Cochain:
    """1 on every edge from ``S_k`` to ``S_{k+1}``, oriented outward."""
    layer = cx.layer_of()
    vals = np.zeros(cx.n_edges, dtype=complex)
    for e, (i, j) in enumerate(cx.edges):
        if layer[i] == k and layer[j] == k + 1:
            vals[e] = 1.0
        elif layer[j] == k and layer[i] == k + 1:
            vals[e] = -1.0
    return Cochain(cx, 1, vals)


def calibrate_l1(off: Callable[[int], int], n: int = 0) -> dict[int, float]:
    """Coefficients of ``L1`` on an outward edge of ``S_n x S_{n+1}``.

    Builds a tree of depth ``n + 2``, applies the assembled ``L1`` to each
    layer form and reads the value on the first edge leaving ``S_n``.
    Returns ``{k: coefficient of C_k}``.
    """
    cx = triangular_tree(off, n + 2)
    L1 = assemble(cx, "L1").matrix
    layer = cx.layer_of()
    edge = next(e for e, (i, j) in enumerate(cx.edges)
                if layer[i] == n and layer[j] == n + 1)
    out = {}
    for k in range(max(0, n - 1), n + 2):
        val = (L1 @ _layer_forms(cx, k).values)[edge]
        if abs(val.imag) > 1e-12:
            raise AssertionError("L1 has complex entries on a real tree")
        out[k] = float(val.real)
    return out


def l1_coefficients(off: Callable[[int], int], depth: int) -> list[complex]:
    """``C_0 .. C_depth`` with ``C_0 = 1``."""
    a, b = l1_root_coefficients(off)
    C = [1.0 + 0j, -(a + 1j) / b]
    for n in range(1, depth):
        nxt = _as_float(off(n + 1), f"off({n + 1})")
        cur = _as_float(off(n), f"off({n})")
        C.append(((cur + 1 + 1j) * C[n] - C[n - 1]) / nxt)
    return C[:depth + 1]


def l1_recurrence_residuals(off: Callable[[int], int],
                            C: Sequence[complex]) -> list[float]:
    """Relative residual of the root equation and each interior equation."""
    out = []
    for n in range(len(C) - 1):
        terms = [(off(n) + 1 + 1j) * C[n], -float(off(n + 1)) * C[n + 1]]
        if n > 0:
            terms.append(-C[n - 1])
        scale = max(abs(t) for t in terms)
        out.append(abs(sum(terms)) / scale if scale else 0.0)
    return out


def l1_summability(off: Callable[[int], int], count: int) -> list[Fraction]:
    """Exact terms ``off(n)^2 / off(n+1)`` for ``n = 0 .. count-1``."""
    return [Fraction(int(off(n)) ** 2, int(off(n + 1))) for n in range(count)]


def _decreasing_tail(terms: Sequence, window: int = 3) -> bool:
    tail = list(terms[-(window + 1):])
    if len(tail) < 2:
        return False
    return all(b < a for a, b in zip(tail, tail[1:]))


def l1_cochain(cx: Triangulation, C: Sequence[complex]) -> Cochain:
    """Materialize the candidate on a tree truncation."""
    layer = cx.layer_of()
    vals = np.zeros(cx.n_edges, dtype=complex)
    for e, (i, j) in enumerate(cx.edges):
        if layer[j] == layer[i] + 1:
            vals[e] = C[layer[i]]
        elif layer[i] == layer[j] + 1:
            vals[e] = -C[layer[j]]
    return Cochain(cx, 1, vals)


def _sphere_sizes(off: Callable[[int], int], depth: int) -> list[int]:
    sizes = [1]
    for n in range(depth):
        sizes.append(sizes[-1] * int(off(n)))
    return sizes


def l1_candidate(off: OffspringSpec | Callable[[int], int], depth: int,
                 max_vertices: int = 200_000,
                 check_summability: bool = True) -> DeficiencyReport:
    """Candidate for ``Ker(L1* + i)`` on the simple tree with offspring ``off``.

    Coefficients ``C_0 .. C_depth`` are computed from the recurrence; the
    candidate is materialized on the deepest truncation with at most
    ``max_vertices`` vertices and scanned there.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    C = l1_coefficients(off, depth)
    rec = l1_recurrence_residuals(off, C)
    terms = l1_summability(off, depth)
    psums, acc = [], Fraction(0)
    for t in terms:
        acc += t
        psums.append(float(acc))
    summable = _decreasing_tail(terms)
    if check_summability and not summable:
        raise SummabilityFails(
            "off(n)^2/off(n+1) is not decreasing over the computed tail: "
            + ", ".join(f"{float(t):.3g}" for t in terms[-4:]))

    sizes = _sphere_sizes(off, depth + 1)
    mass = [abs(c) ** 2 * _as_float(sizes[n + 1], f"#S_{n + 1}")
            for n, c in enumerate(C)]
    tail = _tail_index(mass)

    mat_depth = None
    for d in range(depth, 1, -1):
        if sum(sizes[:d + 1]) <= max_vertices:
            mat_depth = d
            break
    notes = []
    residual = None
    phi_norm = 0.0
    if mat_depth is not None:
        cx = triangular_tree(off, mat_depth)
        phi = l1_cochain(cx, C)
        residual = residual_scan(cx, "L1", phi)
        phi_norm = norm(phi)
        if mat_depth < depth:
            notes.append(f"materialized at depth {mat_depth}: depth "
                         f"{mat_depth + 1} would need {sum(sizes[:mat_depth + 2])} "
                         "vertices")
    else:
        notes.append("no truncation of depth >= 2 fits the vertex budget")

    ok = (summable and residual is not None and residual <= RESIDUAL_TOL
          and phi_norm > 0 and tail is not None
          and max(rec) <= RECURRENCE_TOL)
    return DeficiencyReport(
        operator="L1", indices=list(range(len(C))), coefficients=C,
        recurrence_residuals=rec,
        summability_terms=[float(t) for t in terms], partial_sums=psums,
        hypothesis_holds=summable, layer_mass=mass, tail_index=tail,
        residual=residual, norm=phi_norm, materialized_depth=mat_depth,
        verdict=CONFIRMED if ok else INCONCLUSIVE, notes=notes)


# ---------------------------------------------------------------------------
# L2 on the bipartite layer family
# ---------------------------------------------------------------------------

def _even_sizes(sizes, count: int) -> list[int]:
    if callable(sizes):
        return [int(sizes(n)) for n in range(count)]
    if len(sizes) < count:
        raise ValueError(f"need {count} even-sphere sizes, got {len(sizes)}")
    return [int(s) for s in sizes[:count]]


def l2_coefficients(sizes: Sequence[int]) -> list[complex]:
    """``C_0, C_2, ...`` from ``(#S_{2n+2} + 2 + i) C_{2n+2} + #S_{2n} C_{2n} = 0``."""
    C = [1.0 + 0j]
    for a, b in zip(sizes, sizes[1:]):
        C.append(-a * C[-1] / (b + 2 + 1j))
    return C


def l2_recurrence_residuals(sizes: Sequence[int],
                            C: Sequence[complex]) -> list[float]:
    out = []
    for n in range(len(C) - 1):
        t1 = (sizes[n + 1] + 2 + 1j) * C[n + 1]
        t2 = sizes[n] * C[n]
        scale = max(abs(t1), abs(t2))
        out.append(abs(t1 + t2) / scale if scale else 0.0)
    return out


def l2_cochain(cx: Triangulation, C: Sequence[complex]) -> Cochain:
    """``C_{2n}`` on the face ``[a, b, x]`` with apex ``x`` in ``S_{2n}``."""
    layer = cx.layer_of()
    vals = np.zeros(cx.n_faces, dtype=complex)
    for f, tri in enumerate(cx.faces):
        odd = [v for v in tri if layer[v] % 2 == 1]
        (x,) = [v for v in tri if layer[v] % 2 == 0]
        a, b = sorted(odd)
        _, sign = cx.face_sign(cx.vertices[a], cx.vertices[b], cx.vertices[x])
        vals[f] = sign * C[layer[x] // 2]
    return Cochain(cx, 2, vals)


def calibrate_l2(sizes: Sequence[int]) -> dict[str, tuple[float, float]]:
    """Coefficients of ``L2`` on the depth-2 instance.

    Returns ``{"upper": (coef of C_0, coef of C_2), "lower": (...)}`` read on
    a face with apex in ``S_2`` and on one with apex in ``S_0``.
    """
    cx = bipartite_layer_family(list(sizes[:2]), 2)
    L2 = assemble(cx, "L2").matrix
    layer = cx.layer_of()
    cols = []
    for k in (0, 1):
        ind = l2_cochain(cx, [1.0 if m == k else 0.0 for m in range(2)])
        cols.append(L2 @ ind.values)
    out = {}
    for name, apex_layer in (("upper", 2), ("lower", 0)):
        f = next(f for f, tri in enumerate(cx.faces)
                 if any(layer[v] == apex_layer for v in tri))
        sign = l2_cochain(cx, [1.0, 1.0]).values[f].real
        out[name] = (float((cols[0][f] * sign).real),
                     float((cols[1][f] * sign).real))
    return out


def apex_face_counts(cx: Triangulation) -> dict[int, int]:
    """Number of faces per apex layer ``2n``, read off the complex."""
    layer = cx.layer_of()
    counts: dict[int, int] = {}
    for tri in cx.faces:
        (x,) = [v for v in tri if layer[v] % 2 == 0]
        counts[int(layer[x])] = counts.get(int(layer[x]), 0) + 1
    return counts


def l2_candidate(sizes: Sequence[int] | Callable[[int], int], depth: int,
                 odd_edges: int = 1) -> DeficiencyReport:
    """Candidate for ``Ker(L2* + i)`` on the bipartite layer family.

    ``sizes`` gives ``#S_{2n}``.  Layer masses use face counts from the
    materialized complex; the complex is infinite-family exact on faces
    avoiding the rim, and the mass of the outermost even layer only counts
    the faces present.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    count = depth // 2 + 1
    S = _even_sizes(sizes, count)
    C = l2_coefficients(S)
    rec = l2_recurrence_residuals(S, C)

    ratios = [Fraction(a, b) for a, b in zip(S, S[1:])]
    psums, acc = [], Fraction(0)
    for r in ratios:
        acc += r
        psums.append(float(acc))
    hypothesis = _decreasing_tail(ratios)

    cx = bipartite_layer_family(S, depth, odd_edges)
    counts = apex_face_counts(cx)
    mass = [abs(c) ** 2 * counts.get(2 * n, 0) for n, c in enumerate(C)]
    interior_mass = mass[1:-1] if depth % 2 == 0 else mass[1:]
    if any(b >= a for a, b in zip(interior_mass, interior_mass[1:])):
        raise SummabilityFails("layer masses do not decay: "
                               + ", ".join(f"{m:.3g}" for m in mass))
    q = [a * b / abs(b + 2 + 1j) ** 2 for a, b in zip(S, S[1:])]
    bound_const = 2 * odd_edges * abs(C[0]) ** 2 * S[0]
    tail_bounds = [bound_const * qn for qn in q]

    psi = l2_cochain(cx, C)
    residual = residual_scan(cx, "L2", psi)
    psi_norm = norm(psi)
    tail = _tail_index(mass)
    notes = []
    if not hypothesis:
        notes.append("#S_2n/#S_2n+2 is not decreasing, so the ratio series "
                     "is not summable on the computed range")
    ok = (residual <= RESIDUAL_TOL and psi_norm > 0 and tail is not None
          and max(rec) <= RECURRENCE_TOL)
    if residual > RESIDUAL_TOL:
        notes.append("faces with apex in the lower even sphere give "
                     "(#S_2n + 2 + i) C_2n + #S_2n+2 C_2n+2, which the "
                     "upper-face recurrence does not cancel")
    return DeficiencyReport(
        operator="L2", indices=[2 * n for n in range(len(C))],
        coefficients=C, recurrence_residuals=rec,
        summability_terms=[float(r) for r in ratios], partial_sums=psums,
        hypothesis_holds=hypothesis, layer_mass=mass, tail_index=tail,
        residual=residual, norm=psi_norm, materialized_depth=depth,
        verdict=CONFIRMED if ok else INCONCLUSIVE, tail_bounds=tail_bounds,
        notes=notes)


def block_min_singular_values(cx: Triangulation) -> dict[int, float]:
    """Smallest singular value of ``L2 + i`` on each odd-sphere block.

    Faces on different odd spheres share no edge, so ``L2`` is block
    diagonal; a positive value on a block whose faces are all interior rules
    out a nonzero solution of ``(L2 + i) psi = 0`` supported there.
    """
    layer = cx.layer_of()
    L2 = assemble(cx, "L2").matrix.toarray()
    blocks: dict[int, list[int]] = {}
    for f, tri in enumerate(cx.faces):
        odd = int(next(layer[v] for v in tri if layer[v] % 2 == 1))
        blocks.setdefault(odd, []).append(f)
    out = {}
    for odd, idx in sorted(blocks.items()):
        A = L2[np.ix_(idx, idx)] + 1j * np.eye(len(idx))
        out[odd] = float(np.linalg.svd(A, compute_uv=False).min())
    return out
