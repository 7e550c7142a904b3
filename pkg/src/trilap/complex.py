"""Finite weighted triangulations.

A :class:`Triangulation` holds vertices with weights ``c``, symmetric oriented
edges with weights ``r`` and triangular oriented faces with weights ``s``.
Edges and faces are stored once, on their canonical representative:

* an edge ``(x, y)`` is canonical when ``x`` precedes ``y`` in the vertex
  insertion order;
* a face is stored as the triple sorted by insertion order.  Any ordering of
  its three vertices denotes the same face up to the parity of the
  permutation that sorts it, so ``[x,y,z] = [y,z,x]`` and ``-[x,y,z] = [y,x,z]``.

Complexes are validated on construction and immutable afterwards.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Iterable, Mapping
from types import MappingProxyType
from typing import Any, NamedTuple

import numpy as np


class ComplexError(ValueError):
    """Base class for invalid complexes and bad simplex queries."""


class LoopEdge(ComplexError):
    pass


class MissingEdgeForFace(ComplexError):
    pass


class NonPositiveWeight(ComplexError):
    pass


class DisconnectedComplex(ComplexError):
    pass


class InconsistentWeight(ComplexError):
    pass


class InvalidFace(ComplexError):
    pass


class UnknownVertex(ComplexError, KeyError):
    pass


class UnknownEdge(ComplexError, KeyError):
    pass


class UnknownSimplex(ComplexError, KeyError):
    pass


class EdgeKey(NamedTuple):
    tail: int
    head: int

    def reversed(self) -> EdgeKey:
        return EdgeKey(self.head, self.tail)


class FaceKey(NamedTuple):
    canonical: tuple[int, int, int]
    orientation: int


def _parity(order: tuple[int, int, int]) -> int:
    """Sign of the permutation sorting three distinct keys."""
    a, b, c = order
    inversions = (a > b) + (a > c) + (b > c)
    return -1 if inversions % 2 else 1


def _check_weight(value: float, what: str) -> float:
    w = float(value)
    if not np.isfinite(w) or w <= 0.0:
        raise NonPositiveWeight(f"{what} has non-positive weight {value!r}")
    return w


def _pairs(items, arity: int):
    """Yield (key, weight) from a mapping or an iterable of tuples."""
    if isinstance(items, Mapping):
        yield from items.items()
        return
    for item in items:
        if arity == 1:
            key, w = item
            yield key, w
        elif arity == 2:
            if len(item) == 3:
                yield (item[0], item[1]), item[2]
            else:
                key, w = item
                yield tuple(key), w
        else:
            key, w = item
            yield tuple(key), w


class Triangulation:
    """Validated finite weighted triangulation.

    Use :func:`build` (or a generator) rather than calling the constructor
    with hand-made index arrays.
    """

    def __init__(self, vertices, c, edges, r, faces, s, meta=None):
        self.vertices: tuple[int, ...] = tuple(vertices)
        self._vindex = {v: i for i, v in enumerate(self.vertices)}
        self.c = np.asarray(c, dtype=float)
        self.edges: tuple[tuple[int, int], ...] = tuple(edges)
        self.r = np.asarray(r, dtype=float)
        self.faces: tuple[tuple[int, int, int], ...] = tuple(faces)
        self.s = np.asarray(s, dtype=float)
        for arr in (self.c, self.r, self.s):
            arr.setflags(write=False)
        self._eindex = {e: k for k, e in enumerate(self.edges)}
        self._findex = {f: k for k, f in enumerate(self.faces)}

        nbrs: list[set[int]] = [set() for _ in self.vertices]
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        self._nbrs = [frozenset(n) for n in nbrs]

        ring: list[list[int]] = [[] for _ in self.edges]
        for k, (a, b, cc) in enumerate(self.faces):
            ring[self._eindex[(a, b)]].append(k)
            ring[self._eindex[(b, cc)]].append(k)
            ring[self._eindex[(a, cc)]].append(k)
        self._edge_faces = [tuple(x) for x in ring]
        self.meta = MappingProxyType(dict(meta or {}))
        self._dist_cache: dict[int, np.ndarray] = {}

    # -- sizes -------------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        """Number of undirected edges (canonical representatives)."""
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def size(self, k: int) -> int:
        return (self.n_vertices, self.n_edges, self.n_faces)[k]

    def weights(self, k: int) -> np.ndarray:
        """Inner-product weights on canonical ``k``-simplices."""
        return (self.c, self.r, self.s)[k]

    def __repr__(self) -> str:
        return (f"Triangulation(V={self.n_vertices}, E={self.n_edges}, "
                f"F={self.n_faces})")

    # -- index translation -------------------------------------------------
    def vindex(self, v: int) -> int:
        try:
            return self._vindex[v]
        except KeyError:
            raise UnknownVertex(f"vertex {v!r} not in complex") from None

    def edge_sign(self, x: int, y: int) -> tuple[int, int]:
        """Return ``(canonical index, ±1)`` for the oriented edge ``(x, y)``."""
        i, j = self._vindex.get(x), self._vindex.get(y)
        if i is not None and j is not None:
            if i < j and (i, j) in self._eindex:
                return self._eindex[(i, j)], 1
            if j < i and (j, i) in self._eindex:
                return self._eindex[(j, i)], -1
        raise UnknownEdge(f"edge ({x!r}, {y!r}) not in complex")

    def edge_index_sign(self, i: int, j: int) -> tuple[int, int]:
        """Like :meth:`edge_sign` but for vertex *indices*."""
        if i < j:
            return self._eindex[(i, j)], 1
        return self._eindex[(j, i)], -1

    def face_sign(self, x: int, y: int, z: int) -> tuple[int, int]:
        """Return ``(canonical index, ±1)`` for the oriented face ``[x, y, z]``."""
        idx = tuple(self._vindex.get(v) for v in (x, y, z))
        if None not in idx and len(set(idx)) == 3:
            key = tuple(sorted(idx))
            k = self._findex.get(key)
            if k is not None:
                return k, _parity(idx)
        raise UnknownSimplex(f"face [{x!r}, {y!r}, {z!r}] not in complex")

    def face_key(self, x: int, y: int, z: int) -> FaceKey:
        k, sign = self.face_sign(x, y, z)
        return FaceKey(self.face_vertices(k), sign)

    def edge_vertices(self, k: int) -> EdgeKey:
        i, j = self.edges[k]
        return EdgeKey(self.vertices[i], self.vertices[j])

    def face_vertices(self, k: int) -> tuple[int, int, int]:
        a, b, c = self.faces[k]
        return (self.vertices[a], self.vertices[b], self.vertices[c])

    def simplices(self, k: int) -> list[tuple[int, ...]]:
        """Canonical ``k``-simplices as vertex-id tuples."""
        if k == 0:
            return [(v,) for v in self.vertices]
        if k == 1:
            return [tuple(self.edge_vertices(e)) for e in range(self.n_edges)]
        return [self.face_vertices(f) for f in range(self.n_faces)]

    def edge_keys(self) -> list[EdgeKey]:
        return [self.edge_vertices(k) for k in range(self.n_edges)]

    def oriented_edges(self) -> list[EdgeKey]:
        out = []
        for e in self.edge_keys():
            out.append(e)
            out.append(e.reversed())
        return out

    # -- weights -----------------------------------------------------------
    def c_of(self, x: int) -> float:
        return float(self.c[self.vindex(x)])

    def r_of(self, x: int, y: int) -> float:
        return float(self.r[self.edge_sign(x, y)[0]])

    def s_of(self, x: int, y: int, z: int) -> float:
        return float(self.s[self.face_sign(x, y, z)[0]])

    # -- combinatorics -----------------------------------------------------
    def neighbors(self, x: int) -> set[int]:
        return {self.vertices[j] for j in self._nbrs[self.vindex(x)]}

    def neighbor_indices(self, i: int) -> frozenset[int]:
        return self._nbrs[i]

    def degree(self, x: int) -> int:
        return len(self._nbrs[self.vindex(x)])

    def edge_face_indices(self, k: int) -> tuple[int, ...]:
        """Canonical faces containing canonical edge ``k``."""
        return self._edge_faces[k]

    def face_ring(self, x: int, y: int) -> list[int]:
        """Apexes ``F_e`` of the edge ``e = (x, y)``, in vertex order."""
        k, _ = self.edge_sign(x, y)
        i, j = self.edges[k]
        apex = []
        for f in self._edge_faces[k]:
            (w,) = set(self.faces[f]) - {i, j}
            apex.append(w)
        return [self.vertices[w] for w in sorted(apex)]

    def is_triangle_complete(self) -> bool:
        for k, (i, j) in enumerate(self.edges):
            if len(self._nbrs[i] & self._nbrs[j]) != len(self._edge_faces[k]):
                return False
        return True

    # -- distances ---------------------------------------------------------
    def distances_from(self, o: int) -> np.ndarray:
        """BFS distances from ``o``, indexed like :attr:`vertices`."""
        src = self.vindex(o)
        if src not in self._dist_cache:
            dist = np.full(self.n_vertices, -1, dtype=np.int64)
            dist[src] = 0
            queue = deque([src])
            while queue:
                i = queue.popleft()
                for j in self._nbrs[i]:
                    if dist[j] < 0:
                        dist[j] = dist[i] + 1
                        queue.append(j)
            dist.setflags(write=False)
            self._dist_cache[src] = dist
        return self._dist_cache[src]

    def comb_distance(self, x: int, y: int) -> int:
        return int(self.distances_from(x)[self.vindex(y)])

    def sphere(self, o: int, n: int) -> set[int]:
        d = self.distances_from(o)
        return {self.vertices[i] for i in np.flatnonzero(d == n)}

    def ball(self, o: int, n: int) -> set[int]:
        d = self.distances_from(o)
        return {self.vertices[i] for i in np.flatnonzero(d <= n)}

    # -- boundaries --------------------------------------------------------
    def edge_boundary(self, B: Iterable[int]) -> set[EdgeKey]:
        """Oriented edges with exactly one endpoint in ``B``."""
        inside = {self.vindex(v) for v in B}
        out = set()
        for i, j in self.edges:
            if (i in inside) != (j in inside):
                e = EdgeKey(self.vertices[i], self.vertices[j])
                out.add(e)
                out.add(e.reversed())
        return out

    def face_boundary(self, B: Iterable[int]) -> set[tuple[int, int, int]]:
        """Canonical faces having at least one edge in the edge boundary."""
        inside = {self.vindex(v) for v in B}
        out = set()
        for k, face in enumerate(self.faces):
            hits = sum(v in inside for v in face)
            if 0 < hits < 3:
                out.add(self.face_vertices(k))
        return out

    # -- layer metadata ----------------------------------------------------
    @property
    def origin(self) -> int | None:
        return self.meta.get("origin")

    @property
    def layers(self) -> list[list[int]] | None:
        layers = self.meta.get("layers")
        return None if layers is None else [list(s) for s in layers]

    def layer_of(self) -> np.ndarray:
        """Layer number per vertex index (requires ``layers`` metadata)."""
        layers = self.meta.get("layers")
        if layers is None:
            raise ComplexError("complex carries no layer partition")
        out = np.full(self.n_vertices, -1, dtype=np.int64)
        for n, layer in enumerate(layers):
            for v in layer:
                out[self.vindex(v)] = n
        if (out < 0).any():
            raise ComplexError("layer partition does not cover every vertex")
        return out

    def boundary_vertices(self) -> set[int]:
        return set(self.meta.get("boundary", ()))

    def interior_mask(self, k: int) -> np.ndarray:
        """True on ``k``-simplices none of whose vertices lie on the rim.

        The rim is the ``boundary`` metadata set by generators: vertices whose
        neighbourhood is cut by the truncation.  Operators of order two read
        only simplices incident to the vertices of the simplex they are
        evaluated at, so their values are exact on these simplices.
        """
        rim = np.zeros(self.n_vertices, dtype=bool)
        for v in self.meta.get("boundary", ()):
            rim[self.vindex(v)] = True
        if k == 0:
            return ~rim
        if k == 1:
            idx = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        else:
            idx = np.array(self.faces, dtype=np.int64).reshape(-1, 3)
        return ~rim[idx].any(axis=1)

    def with_meta(self, **updates: Any) -> Triangulation:
        meta = dict(self.meta)
        meta.update(updates)
        return Triangulation(self.vertices, self.c, self.edges, self.r,
                             self.faces, self.s, meta)


def build(vertices, edges=(), faces=(), meta=None) -> Triangulation:
    """Validate raw simplices and weights into a :class:`Triangulation`.

    ``vertices`` is a mapping ``id -> c`` or an iterable of ``(id, c)``;
    ``edges`` a mapping ``(x, y) -> r`` or an iterable of ``(x, y, r)``;
    ``faces`` a mapping ``(x, y, z) -> s`` or an iterable of ``((x, y, z), s)``.
    Listing one orientation of an edge is enough; the reverse is implied.
    """
    vids: list[int] = []
    cvals: list[float] = []
    vindex: dict[int, int] = {}
    for v, w in _pairs(vertices, 1):
        if v in vindex:
            raise ComplexError(f"duplicate vertex {v!r}")
        vindex[v] = len(vids)
        vids.append(v)
        cvals.append(_check_weight(w, f"vertex {v!r}"))
    if not vids:
        raise ComplexError("a complex needs at least one vertex")

    def idx(v):
        try:
            return vindex[v]
        except (KeyError, TypeError):
            raise UnknownVertex(f"vertex {v!r} not declared") from None

    rmap: dict[tuple[int, int], float] = {}
    for (x, y), w in _pairs(edges, 2):
        if x == y:
            raise LoopEdge(f"loop edge ({x!r}, {y!r})")
        i, j = idx(x), idx(y)
        key = (i, j) if i < j else (j, i)
        w = _check_weight(w, f"edge ({x!r}, {y!r})")
        if key in rmap and rmap[key] != w:
            raise InconsistentWeight(
                f"edge ({x!r}, {y!r}) given weights {rmap[key]} and {w}")
        rmap[key] = w

    smap: dict[tuple[int, int, int], float] = {}
    for tri, w in _pairs(faces, 3):
        if len(tri) != 3:
            raise InvalidFace(f"face {tri!r} is not a triangle")
        ids = tuple(idx(v) for v in tri)
        if len(set(ids)) != 3:
            raise InvalidFace(f"face {tri!r} repeats a vertex")
        for a, b in ((0, 1), (1, 2), (2, 0)):
            p, q = sorted((ids[a], ids[b]))
            if (p, q) not in rmap:
                raise MissingEdgeForFace(
                    f"face {tri!r} needs edge ({tri[a]!r}, {tri[b]!r})")
        key = tuple(sorted(ids))
        w = _check_weight(w, f"face {tri!r}")
        if key in smap and smap[key] != w:
            raise InconsistentWeight(
                f"face {tri!r} given weights {smap[key]} and {w}")
        smap[key] = w

    edge_list = sorted(rmap)
    face_list = sorted(smap)

    # connectivity
    nbrs: list[list[int]] = [[] for _ in vids]
    for i, j in edge_list:
        nbrs[i].append(j)
        nbrs[j].append(i)
    seen = [False] * len(vids)
    seen[0] = True
    stack = [0]
    while stack:
        i = stack.pop()
        for j in nbrs[i]:
            if not seen[j]:
                seen[j] = True
                stack.append(j)
    if not all(seen):
        lost = vids[seen.index(False)]
        raise DisconnectedComplex(
            f"vertex {lost!r} is not reachable from {vids[0]!r}")

    return Triangulation(vids, cvals, edge_list, [rmap[e] for e in edge_list],
                         face_list, [smap[f] for f in face_list], meta)


def complete_triangles(cx: Triangulation,
                       weight: Callable[[int, int, int], float] | None = None,
                       ) -> Triangulation:
    """Turn every 3-cycle of the graph into a face.

    Existing faces keep their weight; new ones get ``weight(x, y, z)`` or 1.
    """
    faces = {cx.face_vertices(k): float(cx.s[k]) for k in range(cx.n_faces)}
    for i, j in cx.edges:
        for k in cx.neighbor_indices(i) & cx.neighbor_indices(j):
            if k <= j:
                continue
            tri = (cx.vertices[i], cx.vertices[j], cx.vertices[k])
            if tri not in faces:
                faces[tri] = 1.0 if weight is None else weight(*tri)
    if len(faces) == cx.n_faces:
        return cx
    vertices = list(zip(cx.vertices, cx.c))
    edges = [(*cx.edge_vertices(k), cx.r[k]) for k in range(cx.n_edges)]
    return build(vertices, edges, faces, dict(cx.meta))


def single_triangle(c=1.0, r=1.0, s=1.0) -> Triangulation:
    """The triangle on vertices 0, 1, 2 with uniform weights."""
    return build({0: c, 1: c, 2: c}, [(0, 1, r), (1, 2, r), (0, 2, r)],
                 {(0, 1, 2): s})
