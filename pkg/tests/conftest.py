from __future__ import annotations

import numpy as np
import pytest

from trilap.complex import Triangulation, single_triangle
from trilap.generators import (OffspringSpec, bipartite_layer_family,
                               layered_triangulation, regular_patch,
                               triangular_tree)


def reweighted(cx: Triangulation, seed: int = 0) -> Triangulation:
    """Same simplices with random weights in [0.5, 2]."""
    rng = np.random.default_rng(seed)
    return Triangulation(cx.vertices, rng.uniform(0.5, 2, cx.n_vertices),
                         cx.edges, rng.uniform(0.5, 2, cx.n_edges),
                         cx.faces, rng.uniform(0.5, 2, cx.n_faces),
                         dict(cx.meta))


def family_zoo() -> dict[str, Triangulation]:
    """Every generated family at desk scale."""
    zoo = {"triangle": single_triangle()}
    for R in range(1, 5):
        zoo[f"regular R={R}"] = regular_patch(R)
    for label, off in (("const:2", OffspringSpec.constant(2)),
                       ("poly:1", OffspringSpec.polynomial_floor(1)),
                       ("poly:2", OffspringSpec.polynomial_floor(2))):
        for depth in (2, 4, 6):
            zoo[f"tree {label} depth {depth}"] = triangular_tree(off, depth)
    for sizes in ((2, 2, 2, 2), (1, 2, 3, 4, 5), (3, 3, 3)):
        zoo[f"layered {sizes}"] = layered_triangulation(sizes)
    for base in (2, 4):
        for depth in (2, 4, 6):
            zoo[f"bipartite {base}^n depth {depth}"] = bipartite_layer_family(
                lambda n, b=base: b ** n, depth)
    return zoo


@pytest.fixture(scope="session")
def zoo():
    return family_zoo()


@pytest.fixture
def tri():
    return single_triangle()


@pytest.fixture(scope="session")
def patch3():
    return regular_patch(3)


@pytest.fixture(scope="session")
def weighted_patch():
    return reweighted(regular_patch(3), seed=7)
