"""Cut-off functions, the constants ``C`` and ``M``, and completeness verdicts.

A triangulation is chi-complete when an exhausting family of finitely
supported cut-offs ``chi_n`` with values in ``[0, 1]``, equal to 1 on ``B_n``,
has uniformly bounded vertex energies (constant ``C``) and face-stencil
energies (constant ``M``).  On a finite truncation only the constants of a
given cut-off can be measured; verdicts about the infinite family come from
closed-form rules and are three-valued.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .cochains import Cochain
from .complex import ComplexError, Triangulation
from .generators import LayerSpec, OffspringSpec

COMPLETE, INCOMPLETE, UNKNOWN = "Complete", "Incomplete", "Unknown"


class SupportNotFinite(ValueError):
    """The cut-off does not reach zero inside the available truncation."""


class DepthExceeded(ValueError):
    pass


class PartitionViolation(ComplexError):
    pass


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass
class CutoffSequence:
    """Exhaustion ``B_n`` with cut-offs ``chi_n``.

    ``provenance`` is one of ``bounded-degree``, ``offspring-series``,
    ``xi-series`` or ``user``.
    """

    exhaustion: list[set[int]]
    chi: list[Cochain]
    provenance: str = "user"
    ns: list[int] = field(default_factory=list)

    def violations(self) -> list[str]:
        """Failures of the range, plateau and finite-support conditions."""
        out = []
        for k, (B, chi) in enumerate(zip(self.exhaustion, self.chi)):
            cx = chi.complex
            v = chi.values
            if np.abs(v.imag).max(initial=0.0) > 0 or v.real.min() < 0 \
                    or v.real.max() > 1:
                out.append(f"chi[{k}] leaves [0, 1]")
            idx = [cx.vindex(x) for x in B]
            if idx and not np.all(v[idx] == 1):
                out.append(f"chi[{k}] is not 1 on B[{k}]")
            rim = [cx.vindex(x) for x in cx.boundary_vertices()]
            if rim and np.any(v[rim] != 0):
                out.append(f"chi[{k}] does not vanish on the truncation rim")
        for k in range(1, len(self.exhaustion)):
            if not self.exhaustion[k - 1] <= self.exhaustion[k]:
                out.append(f"B[{k - 1}] is not contained in B[{k}]")
        return out

    def constants(self) -> tuple[float, float]:
        """Largest measured ``C`` and ``M`` over the family."""
        C = max((graph_constant(c) for c in self.chi), default=0.0)
        M = max((face_constant(c) for c in self.chi), default=0.0)
        return C, M


@dataclass
class CompletenessVerdict:
    status: str
    rule: str
    constants: dict[str, float | None] = field(
        default_factory=lambda: {"C": None, "M": None})
    partial_sums: list[float] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.status not in (COMPLETE, INCOMPLETE, UNKNOWN):
            raise ValueError(f"bad status {self.status!r}")

    def to_json(self) -> dict[str, Any]:
        return {"status": self.status, "rule": self.rule,
                "constants": dict(self.constants),
                "partial_sums": list(self.partial_sums),
                "notes": list(self.notes)}


@dataclass
class SupportSets:
    """Finite versions of the exhaustion sets attached to one cut-off.

    ``E_n``: canonical edges with an endpoint in ``B_n``;
    ``F_n``: canonical faces with a vertex in ``B_n``;
    ``Estar``: edges with an apex ``x`` such that ``(e-, x)`` or ``(e+, x)``
    lies in the support of ``d0 chi``;
    ``Fstar``: for each such edge, the set of those apexes.
    """

    E_n: set[tuple[int, int]]
    F_n: set[tuple[int, int, int]]
    Estar: set[tuple[int, int]]
    Fstar: dict[tuple[int, int], set[int]]


@dataclass
class DegreeQuantities:
    """Layer degrees of a 1-dimensional decomposition and their suprema.

    Per-vertex arrays are indexed like ``complex.vertices``; per-edge arrays
    like ``complex.edges`` and hold NaN where the quantity does not apply
    (cross quantities on intra-layer edges and vice versa).
    """

    layer: np.ndarray
    deg_plus: np.ndarray
    deg_minus: np.ndarray
    deg_zero: np.ndarray
    deg_cross: np.ndarray
    deg2_zero: np.ndarray
    deg2_plus: np.ndarray
    deg2_minus: np.ndarray
    eta_plus: np.ndarray
    eta_minus: np.ndarray
    beta: np.ndarray
    gamma_plus: np.ndarray
    gamma_minus: np.ndarray
    tree: bool = False

    @property
    def depth(self) -> int:
        return len(self.eta_plus) - 1

    def xi(self) -> np.ndarray:
        """``xi(n, n+1)`` for ``n = 0 .. depth-1``.

        The tree variant leaves out ``gamma_plus``.
        """
        n = np.arange(self.depth)
        out = (self.eta_plus[n] + self.eta_minus[n + 1] + self.beta[n]
               + self.gamma_minus[n + 1])
        if not self.tree:
            out = out + self.gamma_plus[n]
        return out


# ---------------------------------------------------------------------------
# cut-offs and constants
# ---------------------------------------------------------------------------

def bounded_degree_cutoff(cx: Triangulation, o: int, n: int) -> Cochain:
    """``chi_n(x) = clamp((2n - d(o, x)) / n, 0, 1)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    d = cx.distances_from(o).astype(float)
    return Cochain(cx, 0, np.clip((2 * n - d) / n, 0.0, 1.0))


def _denominator(denom) -> Callable[[int], float]:
    if callable(denom):
        return denom
    seq = list(denom)

    def get(k):
        if k >= len(seq):
            raise DepthExceeded(f"no denominator given for index {k}")
        return seq[k]
    return get


def inv_sqrt(v) -> float:
    """``1/sqrt(v)`` that also works for integers too large for a float."""
    if v <= 0:
        raise ValueError(f"series term needs a positive value, got {v!r}")
    if isinstance(v, int):
        return math.exp(-0.5 * math.log(v))
    return 1.0 / math.sqrt(v)


def ramp_values(n: int, max_distance: int, denom) -> np.ndarray:
    """Cut-off value per distance ``0 .. max_distance``:
    1 up to ``n``, then ``max(0, 1 - sum_{k=n}^{d-1} 1/sqrt(denom(k)))``."""
    get = _denominator(denom)
    vals = np.ones(max_distance + 1)
    acc = 0.0
    for d in range(n + 1, max_distance + 1):
        acc += inv_sqrt(get(d - 1))
        vals[d] = max(0.0, 1.0 - acc)
        if vals[d] == 0.0:
            vals[d:] = 0.0
            break
    return vals


def series_cutoff(cx: Triangulation, o: int, n: int, denom) -> Cochain:
    """Cut-off decreasing by ``1/sqrt(denom(k))`` from layer ``k`` to ``k+1``.

    ``denom`` is a sequence or a callable (offspring or ``xi``).  Raises
    :class:`SupportNotFinite` when the values are still positive on the
    outermost layer of the truncation.
    """
    d = cx.distances_from(o)
    dmax = int(d.max())
    if n < 0:
        raise ValueError("n must be >= 0")
    vals = ramp_values(n, dmax, denom)
    if n >= dmax or vals[dmax] > 0:
        raise SupportNotFinite(
            f"cut-off from n={n} is still {vals[dmax]:.3g} at distance {dmax}")
    return Cochain(cx, 0, vals[d])


def support_radius(n: int, denom, limit: int = 10_000) -> int:
    """Smallest ``m`` with ``sum_{k=n}^{m-1} 1/sqrt(denom(k)) >= 1``."""
    get = _denominator(denom)
    acc = 0.0
    for m in range(n + 1, n + limit + 1):
        acc += inv_sqrt(get(m - 1))
        if acc >= 1.0:
            return m
    raise SupportNotFinite(f"partial sums stay below 1 for {limit} terms")


def vertex_energy(chi: Cochain) -> np.ndarray:
    """Per vertex: ``1/c(x) * sum over incident edges of r |d0 chi|^2``."""
    cx = chi.complex
    idx = np.array(cx.edges, dtype=np.int64).reshape(-1, 2)
    w = cx.r * np.abs(chi.values[idx[:, 1]] - chi.values[idx[:, 0]]) ** 2
    out = np.zeros(cx.n_vertices)
    np.add.at(out, idx[:, 0], w)
    np.add.at(out, idx[:, 1], w)
    return out / cx.c


def face_energy(chi: Cochain) -> np.ndarray:
    """Per edge: ``1/r(e) * sum_x s(e,x) |2 chi(x) - chi(e-) - chi(e+)|^2``."""
    cx = chi.complex
    v = chi.values
    out = np.zeros(cx.n_edges)
    for f, (a, b, c) in enumerate(cx.faces):
        for (i, j), x in (((a, b), c), ((b, c), a), ((a, c), b)):
            k = cx.edge_index_sign(i, j)[0]
            out[k] += cx.s[f] * abs(2 * v[x] - v[i] - v[j]) ** 2
    return out / cx.r


def graph_constant(chi: Cochain) -> float:
    return float(vertex_energy(chi).max(initial=0.0))


def face_constant(chi: Cochain) -> float:
    return float(face_energy(chi).max(initial=0.0))


def cutoff_sequence(cx: Triangulation, o: int, ns: Iterable[int],
                    kind: str = "bounded-degree", denom=None) -> CutoffSequence:
    """Build ``(B_n, chi_n)`` for each ``n`` in ``ns`` with ``B_n`` the ball."""
    ns = list(ns)
    chis = []
    for n in ns:
        if kind == "bounded-degree":
            chis.append(bounded_degree_cutoff(cx, o, n))
        elif kind in ("offspring-series", "xi-series"):
            if denom is None:
                raise ValueError(f"{kind} cut-offs need a denominator")
            chis.append(series_cutoff(cx, o, n, denom))
        else:
            raise ValueError(f"unknown cut-off kind {kind!r}")
    return CutoffSequence([cx.ball(o, n) for n in ns], chis, kind, ns)


def support_sets(chi: Cochain, B: Iterable[int]) -> SupportSets:
    cx = chi.complex
    inside = np.zeros(cx.n_vertices, dtype=bool)
    for x in B:
        inside[cx.vindex(x)] = True
    eidx = np.array(cx.edges, dtype=np.int64).reshape(-1, 2)
    fidx = np.array(cx.faces, dtype=np.int64).reshape(-1, 3)
    dchi = chi.values[eidx[:, 1]] - chi.values[eidx[:, 0]]
    in_supp = dchi != 0

    E_n = {tuple(cx.edge_vertices(k)) for k in
           np.flatnonzero(inside[eidx].any(axis=1))}
    F_n = {cx.face_vertices(k) for k in
           np.flatnonzero(inside[fidx].any(axis=1))} if cx.n_faces else set()
    Fstar: dict[tuple[int, int], set[int]] = {}
    for k, (i, j) in enumerate(cx.edges):
        hits = set()
        for f in cx.edge_face_indices(k):
            (x,) = set(cx.faces[f]) - {i, j}
            if (in_supp[cx.edge_index_sign(i, x)[0]]
                    or in_supp[cx.edge_index_sign(j, x)[0]]):
                hits.add(cx.vertices[x])
        if hits:
            Fstar[tuple(cx.edge_vertices(k))] = hits
    return SupportSets(E_n, F_n, set(Fstar), Fstar)


# ---------------------------------------------------------------------------
# offspring
# ---------------------------------------------------------------------------

def offspring(cx: Triangulation, n: int) -> Fraction:
    """``#S_{n+1} / #S_n`` measured from the origin of a tree."""
    o = cx.origin if cx.origin is not None else cx.vertices[0]
    d = cx.distances_from(o)
    if n < 0 or n + 1 > int(d.max()):
        raise DepthExceeded(f"spheres up to {n + 1} needed, depth is {d.max()}")
    return Fraction(int((d == n + 1).sum()), int((d == n).sum()))


def offspring_hypothesis(cx: Triangulation) -> float:
    """``sup_n sup_{x in S_n} #(V(x) cap S_{n+1}) / off(n)`` on the truncation."""
    o = cx.origin if cx.origin is not None else cx.vertices[0]
    d = cx.distances_from(o)
    depth = int(d.max())
    best = 0.0
    for n in range(depth):
        off = offspring(cx, n)
        for i in np.flatnonzero(d == n):
            kids = sum(1 for j in cx.neighbor_indices(i) if d[j] == n + 1)
            best = max(best, float(kids / off))
    return best


def series_partial_sums(denom, start: int, count: int) -> list[float]:
    """Partial sums of ``1/sqrt(denom(k))`` for ``k = start, start+1, ...``."""
    if isinstance(denom, OffspringSpec):
        def term(k):
            return math.exp(-0.5 * denom.log(k))
    else:
        get = _denominator(denom)

        def term(k):
            return inv_sqrt(get(k))
    out, acc = [], 0.0
    for k in range(start, start + count):
        try:
            acc += term(k)
        except (DepthExceeded, IndexError):
            break
        out.append(acc)
    return out


def _growth_hint(off: OffspringSpec, terms: int) -> str:
    ns = np.arange(max(2, terms // 2), terms + 1)
    try:
        logs = np.array([off.log(int(n)) for n in ns])
    except (IndexError, ValueError):
        return "too few offspring values for a growth estimate"
    if np.ptp(logs) == 0:
        return "offspring constant over the tail; comparison with sum 1 suggests divergence"
    slope = np.polyfit(np.log(ns), logs, 1)[0]
    side = "divergence" if slope <= 2 else "convergence"
    return (f"log-log slope of off(n) over the tail is {slope:.3g}; "
            f"comparison with n^(-{slope / 2:.3g}) suggests {side}")


def offspring_verdict(off: OffspringSpec, terms: int = 64) -> CompletenessVerdict:
    """Classify a simple triangular tree by ``sum_{n>=1} 1/sqrt(off(n))``.

    Closed-form rules cover polynomial-floor, geometric and constant
    offspring.  On generated trees every vertex of ``S_n`` has exactly
    ``off(n)`` children, so the bounded-ratio hypothesis holds by
    construction.
    """
    sums = series_partial_sums(off, 1, terms)
    notes = ["each vertex of S_n has off(n) children, so the offspring ratio "
             "hypothesis holds with value 1"]
    if off.kind == "poly":
        if off.alpha <= 2:
            status, cmp_ = COMPLETE, "alpha<=2: series diverges"
        else:
            status, cmp_ = INCOMPLETE, "alpha>2: series converges"
        rule = (f"{cmp_} (off(n) = floor(n^{off.alpha:g}) + 1, "
                f"terms ~ n^(-{off.alpha / 2:g}))")
    elif off.kind == "geom":
        if off.q > 1:
            status = INCOMPLETE
            rule = f"off(n) ~ {off.q:g}^n: geometric terms, series converges"
        else:
            status = COMPLETE
            rule = "q <= 1 makes off(n) = 1: series diverges"
    elif off.kind == "const":
        status = COMPLETE
        rule = f"off(n) = {off.k}: constant terms, series diverges"
    else:
        status = UNKNOWN
        rule = "no closed form for this offspring; partial sums only"
        notes.append(_growth_hint(off, min(terms, len(sums))))
    return CompletenessVerdict(status, rule, partial_sums=sums, notes=notes)


# ---------------------------------------------------------------------------
# 1-dimensional decompositions
# ---------------------------------------------------------------------------

def _layers(cx: Triangulation) -> np.ndarray:
    if cx.layers is not None:
        return cx.layer_of()
    o = cx.origin if cx.origin is not None else cx.vertices[0]
    return np.asarray(cx.distances_from(o)).copy()


def degree_quantities(cx: Triangulation, tree: bool = False) -> DegreeQuantities:
    """Layer degrees for the complex's layer partition (spheres by default).

    ``tree=True`` uses the tree variant, in which the cross-edge quantity
    counts apexes in the upper layer only.
    """
    layer = _layers(cx)
    depth = int(layer.max())
    eidx = np.array(cx.edges, dtype=np.int64).reshape(-1, 2)
    gap = np.abs(layer[eidx[:, 0]] - layer[eidx[:, 1]])
    if (gap > 1).any():
        k = int(np.flatnonzero(gap > 1)[0])
        raise PartitionViolation(
            f"edge {tuple(cx.edge_vertices(k))} spans layers "
            f"{layer[eidx[k, 0]]} and {layer[eidx[k, 1]]}")

    nv, ne = cx.n_vertices, cx.n_edges
    dp, dm, dz = np.zeros(nv), np.zeros(nv), np.zeros(nv)
    for k, (i, j) in enumerate(cx.edges):
        for a, b in ((i, j), (j, i)):
            delta = layer[b] - layer[a]
            target = dp if delta == 1 else dm if delta == -1 else dz
            target[a] += cx.r[k]
    dp, dm, dz = dp / cx.c, dm / cx.c, dz / cx.c

    cross = np.full(ne, np.nan)
    g0, gp, gm = (np.full(ne, np.nan) for _ in range(3))
    for k, (i, j) in enumerate(cx.edges):
        lo = min(layer[i], layer[j])
        apex = []
        for f in cx.edge_face_indices(k):
            (x,) = set(cx.faces[f]) - {i, j}
            apex.append((layer[x], cx.s[f]))
        if layer[i] != layer[j]:
            allowed = (lo + 1,) if tree else (lo, lo + 1)
            cross[k] = sum(s for m, s in apex if m in allowed) / cx.r[k]
        else:
            g0[k] = sum(s for m, s in apex if m == lo) / cx.r[k]
            gp[k] = sum(s for m, s in apex if m == lo + 1) / cx.r[k]
            gm[k] = sum(s for m, s in apex if m == lo - 1) / cx.r[k]

    def vsup(vals):
        out = np.zeros(depth + 1)
        np.maximum.at(out, layer, vals)
        return out

    elo = np.minimum(layer[eidx[:, 0]], layer[eidx[:, 1]])

    def esup(vals):
        out = np.zeros(depth + 1)
        ok = ~np.isnan(vals)
        np.maximum.at(out, elo[ok], vals[ok])
        return out

    return DegreeQuantities(layer, dp, dm, dz, cross, g0, gp, gm,
                            vsup(dp), vsup(dm), esup(cross), esup(gp),
                            esup(gm), tree)


def _xi_growth_class(source) -> tuple[str, float] | None:
    """Recognize a closed-form growth class of ``xi(n, n+1)``."""
    if isinstance(source, dict):
        kind = source.get("kind")
        if kind == "bounded":
            return ("bounded", 0.0)
        if kind == "poly":
            return ("poly", float(source["p"]))
        return None
    if isinstance(source, LayerSpec):
        if len(set(source.sizes)) == 1:
            return ("bounded", 0.0)
        return None
    if isinstance(source, Triangulation):
        desc = source.meta.get("descriptor") or {}
        fam = desc.get("family")
        if fam in ("regular", "triangle"):
            return ("bounded", 0.0)
        if fam == "layered" and len(set(desc.get("sizes", [0, 1]))) == 1:
            return ("bounded", 0.0)
        if fam == "tree" and "off" in desc:
            off = desc["off"]
            if off.get("kind") == "const":
                return ("bounded", 0.0)
            if off.get("kind") == "poly":
                # eta+_n = off(n); the other terms are bounded on simple trees
                return ("poly", float(off["alpha"]))
    return None


def xi_verdict(source, terms: int = 64) -> CompletenessVerdict:
    """Sufficient criterion ``sum 1/sqrt(xi(n, n+1)) = infinity``.

    ``source`` is a complex with a layer partition, a :class:`LayerSpec`, a
    growth-class mapping (``{"kind": "bounded"}`` or ``{"kind": "poly",
    "p": p}`` for ``xi ~ n^p``) or a finite sequence of ``xi`` values.  The
    criterion is sufficient only, so ``Incomplete`` is never returned.
    """
    sums: list[float] = []
    notes: list[str] = []
    if isinstance(source, Triangulation):
        tree = (source.meta.get("descriptor") or {}).get("family") == "tree"
        xi = degree_quantities(source, tree=tree).xi()
        sums = series_partial_sums(list(xi), 0, len(xi))
        notes.append("partial sums measured on the truncation")
    elif isinstance(source, (list, tuple, np.ndarray)):
        sums = series_partial_sums(list(source), 0, len(source))
    growth = _xi_growth_class(source)
    if growth is None:
        return CompletenessVerdict(
            UNKNOWN, "no closed-form growth class for xi; partial sums only",
            partial_sums=sums, notes=notes)
    kind, p = growth
    if kind == "bounded":
        return CompletenessVerdict(
            COMPLETE, "xi bounded: terms bounded below, series diverges",
            partial_sums=sums, notes=notes)
    if p <= 2:
        return CompletenessVerdict(
            COMPLETE, f"xi ~ n^{p:g}: terms ~ n^(-{p / 2:g}), series diverges",
            partial_sums=sums, notes=notes)
    return CompletenessVerdict(
        UNKNOWN, f"xi ~ n^{p:g}: series converges, sufficient criterion silent",
        partial_sums=sums, notes=notes)


def measured_constants(seq: CutoffSequence) -> dict[str, float]:
    C, M = seq.constants()
    return {"C": C, "M": M}


def with_constants(verdict: CompletenessVerdict,
                   seq: CutoffSequence) -> CompletenessVerdict:
    verdict.constants = measured_constants(seq)
    return verdict


def tree_face_bounds(chi: Cochain, n: int, off: Callable[[int], int] | Sequence[int]
                     ) -> list[str]:
    """Check the per-simplex bounds of the offspring cut-off on a simple tree.

    For ``x`` in ``S_m`` with ``m > n``: upward energy ``<= #children/off(m)``,
    downward ``<= 1/off(m-1)``; for an upward edge ``e`` in ``S_m x S_{m+1}``:
    face energy ``<= #(V(e-) cap S_{m+1})/off(m)``; for an intra-sphere edge:
    ``<= 4/off(m-1)``.  Returns descriptions of the violated bounds.
    """
    get = _denominator(off)
    cx = chi.complex
    o = cx.origin if cx.origin is not None else cx.vertices[0]
    d = cx.distances_from(o)
    depth = int(d.max())
    v = chi.values.real
    tol = 1e-12
    bad = []
    for i in range(cx.n_vertices):
        m = int(d[i])
        if m <= n:
            continue
        up = [j for j in cx.neighbor_indices(i) if d[j] == m + 1]
        down = [j for j in cx.neighbor_indices(i) if d[j] == m - 1]
        if m < depth:
            e_up = sum((v[i] - v[j]) ** 2 for j in up)
            if e_up > len(up) / get(m) + tol:
                bad.append(f"upward energy at {cx.vertices[i]}")
        e_down = sum((v[i] - v[j]) ** 2 for j in down)
        if e_down > 1 / get(m - 1) + tol:
            bad.append(f"downward energy at {cx.vertices[i]}")
    fe = face_energy(chi)
    for k, (i, j) in enumerate(cx.edges):
        m = int(min(d[i], d[j]))
        if m <= n:
            continue
        if d[i] != d[j]:
            if m >= depth:
                continue
            low = i if d[i] < d[j] else j
            kids = sum(1 for x in cx.neighbor_indices(low) if d[x] == m + 1)
            if fe[k] > kids / get(m) + tol:
                bad.append(f"face energy on upward edge {cx.edge_vertices(k)}")
        elif fe[k] > 4 / get(m - 1) + tol:
            bad.append(f"face energy on sibling edge {cx.edge_vertices(k)}")
    return bad
