"""Truncated triangulation families.

Every generator returns a validated, triangle-complete :class:`Triangulation`
whose metadata records the origin, the layer partition (spheres), the rim
(``boundary``: vertices whose neighbourhood is cut by the truncation) and the
JSON descriptor that reproduces it.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

from .complex import ComplexError, Triangulation, build, complete_triangles


class OffspringNotRepresentable(ComplexError):
    pass


class DescriptorError(ValueError):
    pass


@dataclass(frozen=True)
class OffspringSpec:
    """Offspring function ``off(n)`` of a triangular tree.

    ``kind`` is one of ``poly`` (``floor(n**alpha) + 1``), ``geom``
    (``max(1, floor(q**n))``), ``const``, ``explicit`` (a finite table) or
    ``custom`` (a callable; ``label`` names it for reports).
    """

    kind: str
    alpha: float | None = None
    q: float | None = None
    k: int | None = None
    values: tuple[int, ...] = ()
    func: Callable[[int], int] | None = field(default=None, compare=False)
    label: str = ""
    params: tuple = ()

    @classmethod
    def polynomial_floor(cls, alpha: float) -> OffspringSpec:
        return cls("poly", alpha=float(alpha))

    @classmethod
    def geometric(cls, q: float) -> OffspringSpec:
        return cls("geom", q=float(q))

    @classmethod
    def constant(cls, k: int) -> OffspringSpec:
        if int(k) < 1:
            raise ValueError("constant offspring must be >= 1")
        return cls("const", k=int(k))

    @classmethod
    def explicit(cls, values: Sequence[int]) -> OffspringSpec:
        vals = tuple(int(v) for v in values)
        if any(v < 1 for v in vals):
            raise ValueError("offspring values must be >= 1")
        return cls("explicit", values=vals)

    @classmethod
    def custom(cls, func: Callable[[int], int], label: str = "custom",
               params: tuple = ()) -> OffspringSpec:
        return cls("custom", func=func, label=label, params=tuple(params))

    @classmethod
    def double_exponential(cls, base: int = 2, rate: int = 3) -> OffspringSpec:
        """``off(n) = base ** (rate ** n)``, exact in integers."""
        base, rate = int(base), int(rate)
        return cls.custom(lambda n: base ** (rate ** n), label="dexp",
                          params=(base, rate))

    def __call__(self, n: int) -> int:
        if n < 0:
            raise ValueError("offspring is defined for n >= 0")
        if self.kind == "poly":
            return math.floor(n ** self.alpha) + 1
        if self.kind == "geom":
            return max(1, math.floor(self.q ** n))
        if self.kind == "const":
            return self.k
        if self.kind == "explicit":
            if n >= len(self.values):
                raise IndexError(f"explicit offspring has no value at n={n}")
            return self.values[n]
        if self.kind == "custom":
            v = int(self.func(n))
            if v < 1:
                raise ValueError(f"custom offspring returned {v} at n={n}")
            return v
        raise ValueError(f"unknown offspring kind {self.kind!r}")

    def log(self, n: int) -> float:
        """Natural log of ``off(n)``, without building huge integers."""
        if self.kind == "custom" and self.label == "dexp":
            base, rate = self.params
            return float(rate) ** n * math.log(base)
        return math.log(self(n))

    def to_json(self) -> dict[str, Any]:
        if self.kind == "poly":
            return {"kind": "poly", "alpha": self.alpha}
        if self.kind == "geom":
            return {"kind": "geom", "q": self.q}
        if self.kind == "const":
            return {"kind": "const", "k": self.k}
        if self.kind == "explicit":
            return {"kind": "explicit", "values": list(self.values)}
        if self.label == "dexp":
            return {"kind": "dexp", "base": self.params[0],
                    "rate": self.params[1]}
        raise DescriptorError("custom offspring callbacks are not serializable")

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> OffspringSpec:
        kind = d.get("kind")
        try:
            if kind == "poly":
                return cls.polynomial_floor(d["alpha"])
            if kind == "geom":
                return cls.geometric(d["q"])
            if kind == "const":
                return cls.constant(d["k"])
            if kind == "explicit":
                return cls.explicit(d["values"])
            if kind == "dexp":
                return cls.double_exponential(d.get("base", 2), d.get("rate", 3))
        except (KeyError, TypeError, ValueError) as exc:
            raise DescriptorError(f"bad offspring descriptor {d!r}: {exc}") from exc
        raise DescriptorError(f"unknown offspring kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> OffspringSpec:
        """Parse the CLI shorthand ``poly:2``, ``geom:1.5``, ``const:3``,
        ``explicit:1,2,3`` or ``dexp:2,3``."""
        kind, _, arg = text.partition(":")
        try:
            if kind == "poly":
                return cls.polynomial_floor(float(arg))
            if kind == "geom":
                return cls.geometric(float(arg))
            if kind == "const":
                return cls.constant(int(arg))
            if kind == "explicit":
                return cls.explicit([int(a) for a in arg.split(",")])
            if kind == "dexp":
                parts = [int(a) for a in arg.split(",")] if arg else [2, 3]
                return cls.double_exponential(*parts)
        except ValueError as exc:
            raise DescriptorError(f"bad offspring {text!r}: {exc}") from exc
        raise DescriptorError(f"unknown offspring kind in {text!r}")


@dataclass(frozen=True)
class LayerSpec:
    """Sphere sizes ``#S_n`` and the wiring rule joining consecutive spheres."""

    sizes: tuple[int, ...]
    wiring: str = "strip"

    def __post_init__(self):
        if not self.sizes or any(int(n) < 1 for n in self.sizes):
            raise ValueError("layer sizes must be positive")


def _layer_meta(layers: list[list[int]], descriptor: dict, rim=None) -> dict:
    return {
        "origin": layers[0][0],
        "layers": layers,
        "boundary": list(layers[-1]) if rim is None else rim,
        "descriptor": descriptor,
    }


def regular_patch(radius: int, degree: int = 6) -> Triangulation:
    """Ball of radius ``radius`` in the 6-regular triangular lattice.

    Vertex 0 is the centre; spheres are the hexagonal rings.  All weights 1.
    """
    if degree != 6:
        raise ValueError("only the 6-regular lattice is available")
    if radius < 1:
        raise ValueError("radius must be >= 1")

    def hexdist(q, r):
        return max(abs(q), abs(r), abs(q + r))

    coords = sorted(((q, r) for q in range(-radius, radius + 1)
                     for r in range(-radius, radius + 1)
                     if hexdist(q, r) <= radius),
                    key=lambda p: (hexdist(*p), p))
    ids = {p: i for i, p in enumerate(coords)}
    steps = [(1, 0), (0, 1), (-1, 1)]
    edges = []
    for (q, r), i in ids.items():
        for dq, dr in steps:
            j = ids.get((q + dq, r + dr))
            if j is not None:
                edges.append((i, j, 1.0))
    faces = {}
    for (q, r), i in ids.items():
        for tri in (((q + 1, r), (q, r + 1)), ((q, r + 1), (q - 1, r + 1))):
            a, b = ids.get(tri[0]), ids.get(tri[1])
            if a is not None and b is not None:
                faces[(i, a, b)] = 1.0
    layers = [[] for _ in range(radius + 1)]
    for p, i in ids.items():
        layers[hexdist(*p)].append(i)
    desc = {"family": "regular", "radius": radius}
    cx = build([(i, 1.0) for i in range(len(coords))], edges, faces,
               _layer_meta([sorted(s) for s in layers], desc))
    return complete_triangles(cx)


def triangular_tree(off: OffspringSpec | Callable[[int], int], depth: int,
                    simple: bool = True) -> Triangulation:
    """Triangular tree with spheres ``S_0 .. S_depth``.

    Each vertex of ``S_n`` gets ``off(n)`` children; siblings are joined in a
    path and each consecutive sibling pair spans a face with the parent.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if not simple:
        raise ValueError("only simple (unit-weight) trees are generated")
    layers = [[0]]
    parent = {}
    edges = []
    faces = {}
    next_id = 1
    for n in range(depth):
        k = off(n)
        if int(k) != k or k < 1:
            raise OffspringNotRepresentable(f"off({n}) = {k!r}")
        k = int(k)
        layer = []
        for p in layers[n]:
            kids = list(range(next_id, next_id + k))
            next_id += k
            for a in kids:
                parent[a] = p
                edges.append((p, a, 1.0))
            for a, b in zip(kids, kids[1:]):
                edges.append((a, b, 1.0))
                faces[(p, a, b)] = 1.0
            layer.extend(kids)
        layers.append(layer)
    desc = {"family": "tree", "depth": depth}
    if isinstance(off, OffspringSpec):
        try:
            desc["off"] = off.to_json()
        except DescriptorError:
            pass
    cx = build([(v, 1.0) for v in range(next_id)], edges, faces,
               _layer_meta(layers, desc))
    return complete_triangles(cx)


def _strip_zipper(lower: list[int], upper: list[int]):
    """Triangulate the strip between two paths; yields edges and faces."""
    p, q = len(lower), len(upper)
    i = j = 0
    edges = [(lower[0], upper[0])]
    faces = []
    while i < p - 1 or j < q - 1:
        # advance the side that lags in relative position
        adv_lower = j >= q - 1 or (i < p - 1 and (i + 1) * (q - 1) <= (j + 1) * (p - 1))
        if adv_lower:
            faces.append((lower[i], lower[i + 1], upper[j]))
            i += 1
        else:
            faces.append((lower[i], upper[j], upper[j + 1]))
            j += 1
        edges.append((lower[i], upper[j]))
    return edges, faces


def layered_triangulation(spec: LayerSpec | Sequence[int],
                          depth: int | None = None) -> Triangulation:
    """Layers ``S_0 .. S_depth``, each a path, consecutive layers zipped into
    a triangulated strip."""
    if not isinstance(spec, LayerSpec):
        spec = LayerSpec(tuple(int(n) for n in spec))
    if spec.wiring != "strip":
        raise ValueError(f"unknown wiring {spec.wiring!r}")
    if depth is None:
        depth = len(spec.sizes) - 1
    if depth + 1 > len(spec.sizes):
        raise ValueError("not enough layer sizes for the requested depth")
    layers = []
    next_id = 0
    for n in range(depth + 1):
        layers.append(list(range(next_id, next_id + spec.sizes[n])))
        next_id += spec.sizes[n]
    edges = []
    faces = {}
    for layer in layers:
        edges.extend((a, b, 1.0) for a, b in zip(layer, layer[1:]))
    for lo, hi in zip(layers, layers[1:]):
        zedges, zfaces = _strip_zipper(lo, hi)
        edges.extend((a, b, 1.0) for a, b in zedges)
        faces.update({f: 1.0 for f in zfaces})
    desc = {"family": "layered", "sizes": list(spec.sizes[:depth + 1]),
            "wiring": spec.wiring}
    cx = build([(v, 1.0) for v in range(next_id)], edges, faces,
               _layer_meta(layers, desc))
    return complete_triangles(cx)


def _even_size(sizes, n: int) -> int:
    v = sizes(n) if callable(sizes) else sizes[n]
    if int(v) != v or v < 1:
        raise ValueError(f"#S_{2 * n} must be a positive integer, got {v!r}")
    return int(v)


def bipartite_layer_family(sizes: Sequence[int] | Callable[[int], int],
                           depth: int, odd_edges: int = 1) -> Triangulation:
    """Triangulation whose faces all sit on edges inside odd spheres.

    ``sizes[n]`` (or ``sizes(n)``) is ``#S_{2n}``; even spheres carry no
    internal edges.  Each odd sphere ``S_{2n+1}`` is ``odd_edges`` disjoint
    edges, and every vertex of ``S_{2n}`` and ``S_{2n+2}`` is an apex of every
    such edge.  An edge from an odd vertex to an even one then lies on exactly
    one face, which is the stencil producing the coefficients
    ``(#S_{2n+2} + 2)`` and ``#S_{2n}`` at faces with apex in ``S_{2n+2}``.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if odd_edges < 1:
        raise ValueError("odd_edges must be >= 1")
    layers: list[list[int]] = []
    next_id = 0
    for m in range(depth + 1):
        size = _even_size(sizes, m // 2) if m % 2 == 0 else 2 * odd_edges
        layers.append(list(range(next_id, next_id + size)))
        next_id += size
    edges = []
    faces = {}
    for m in range(1, depth + 1, 2):
        odd = layers[m]
        pairs = [(odd[2 * t], odd[2 * t + 1]) for t in range(odd_edges)]
        apexes = layers[m - 1] + (layers[m + 1] if m + 1 <= depth else [])
        for a, b in pairs:
            edges.append((a, b, 1.0))
            for x in apexes:
                edges.append((a, x, 1.0))
                edges.append((b, x, 1.0))
                faces[(a, b, x)] = 1.0
    desc = {"family": "bipartite", "depth": depth, "odd_edges": odd_edges}
    if not callable(sizes):
        desc["sizes"] = [int(s) for s in sizes[:depth // 2 + 1]]
    cx = build([(v, 1.0) for v in range(next_id)], edges, faces,
               _layer_meta(layers, desc))
    return complete_triangles(cx)


def _size_rule(spec) -> Callable[[int], int] | list[int]:
    if isinstance(spec, dict):
        if spec.get("kind") == "pow":
            base = int(spec["base"])
            return lambda n: base ** n
        raise DescriptorError(f"unknown size rule {spec!r}")
    return [int(s) for s in spec]


def from_descriptor(desc: dict[str, Any]) -> Triangulation:
    """Build a complex from a JSON generator descriptor, e.g.
    ``{"family": "tree", "off": {"kind": "poly", "alpha": 2.0}, "depth": 8}``."""
    if not isinstance(desc, dict):
        raise DescriptorError("descriptor must be a JSON object")
    family = desc.get("family")
    try:
        if family == "triangle":
            from .complex import single_triangle
            return single_triangle()
        if family == "regular":
            return regular_patch(int(desc["radius"]))
        if family == "tree":
            off = OffspringSpec.from_json(desc["off"])
            return triangular_tree(off, int(desc["depth"]))
        if family == "layered":
            sizes = desc["sizes"]
            return layered_triangulation(LayerSpec(tuple(int(s) for s in sizes),
                                                   desc.get("wiring", "strip")),
                                         desc.get("depth"))
        if family == "bipartite":
            sizes = _size_rule(desc["sizes"])
            cx = bipartite_layer_family(sizes, int(desc["depth"]),
                                        int(desc.get("odd_edges", 1)))
            if isinstance(desc["sizes"], dict):
                d = dict(cx.meta["descriptor"])
                d["sizes"] = desc["sizes"]
                cx = cx.with_meta(descriptor=d)
            return cx
    except (KeyError, TypeError) as exc:
        raise DescriptorError(f"incomplete descriptor {desc!r}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, (DescriptorError, ComplexError)):
            raise
        raise DescriptorError(str(exc)) from exc
    raise DescriptorError(f"unknown family {family!r}")
