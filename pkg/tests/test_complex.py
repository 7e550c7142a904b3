from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trilap.complex import (DisconnectedComplex, EdgeKey, InconsistentWeight,
                            LoopEdge, MissingEdgeForFace, NonPositiveWeight,
                            UnknownEdge, UnknownVertex, build,
                            complete_triangles, single_triangle)
from trilap.generators import OffspringSpec, regular_patch, triangular_tree


def test_single_triangle_counts(tri):
    assert tri.n_vertices == 3
    assert len(tri.oriented_edges()) == 6
    assert tri.n_edges == 3
    assert tri.n_faces == 1


def test_missing_edge_for_face():
    with pytest.raises(MissingEdgeForFace):
        build({0: 1, 1: 1, 2: 1}, [(0, 1, 1), (0, 2, 1)], {(0, 1, 2): 1})


def test_two_disjoint_triangles_disconnected():
    verts = {v: 1 for v in range(6)}
    edges = [(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1)]
    with pytest.raises(DisconnectedComplex):
        build(verts, edges, {(0, 1, 2): 1, (3, 4, 5): 1})


def test_loop_and_weight_errors():
    with pytest.raises(LoopEdge):
        build({0: 1}, [(0, 0, 1)])
    with pytest.raises(NonPositiveWeight):
        build({0: 1, 1: 0}, [(0, 1, 1)])
    with pytest.raises(NonPositiveWeight):
        build({0: 1, 1: 1}, [(0, 1, -2)])
    with pytest.raises(InconsistentWeight):
        build({0: 1, 1: 1}, [(0, 1, 1), (1, 0, 2)])
    with pytest.raises(UnknownVertex):
        build({0: 1}, [(0, 5, 1)])


def test_symmetric_closure():
    cx = build({0: 1, 1: 1}, [(1, 0, 2.5)])
    assert cx.r_of(0, 1) == cx.r_of(1, 0) == 2.5
    assert cx.edge_sign(1, 0)[1] == -cx.edge_sign(0, 1)[1]


def test_face_key_parity(tri):
    k, s = tri.face_sign(0, 1, 2)
    assert s == 1
    for perm in itertools.permutations((0, 1, 2)):
        k2, s2 = tri.face_sign(*perm)
        assert k2 == k
        inversions = sum(perm[a] > perm[b] for a in range(3) for b in range(a + 1, 3))
        assert s2 == (-1) ** inversions
    assert tri.face_key(2, 0, 1).orientation == 1
    assert tri.face_key(1, 0, 2).orientation == -1


def test_complete_triangles_k4():
    # all six edges of K4, no faces: the four 3-cliques become faces
    edges = [(a, b, 1) for a, b in itertools.combinations(range(4), 2)]
    cx = complete_triangles(build({v: 1 for v in range(4)}, edges))
    brute = [t for t in itertools.combinations(range(4), 3)
             if all(cx.neighbors(a) >= {b} for a, b in itertools.combinations(t, 2))]
    assert len(brute) == 4
    assert cx.n_faces == 4
    assert cx.is_triangle_complete()


def test_complete_triangles_idempotent_and_keeps_weight():
    tri = build({0: 1, 1: 1, 2: 1}, [(0, 1, 1), (1, 2, 1), (0, 2, 1)],
                {(0, 1, 2): 7.0})
    out = complete_triangles(tri)
    assert out is tri
    assert out.n_faces == 1 and out.s_of(2, 1, 0) == 7.0
    patch = regular_patch(2)
    assert complete_triangles(patch) is patch


def test_face_ring_examples(tri):
    assert tri.face_ring(0, 1) == [2]
    patch = regular_patch(3)
    # edge between the centre and a ring-1 vertex is interior
    assert len(patch.face_ring(0, next(iter(patch.neighbors(0))))) == 2
    path = triangular_tree(OffspringSpec.constant(1), 3)
    assert path.face_ring(0, 1) == []
    with pytest.raises(UnknownEdge):
        tri.face_ring(0, 7)


def test_face_ring_equals_common_neighbours(patch3):
    for e in patch3.edge_keys():
        common = patch3.neighbors(e.tail) & patch3.neighbors(e.head)
        assert set(patch3.face_ring(*e)) == common


def _bfs(cx, o):
    dist, frontier = {o: 0}, [o]
    while frontier:
        nxt = []
        for v in frontier:
            for w in cx.neighbors(v):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def test_distances(tri):
    assert tri.comb_distance(0, 0) == 0
    assert tri.comb_distance(0, 2) == 1
    tree = triangular_tree(OffspringSpec.constant(2), 3)
    assert tree.comb_distance(0, max(tree.vertices)) == 3
    for cx in (tree, regular_patch(3)):
        oracle = _bfs(cx, 0)
        assert all(cx.comb_distance(0, v) == d for v, d in oracle.items())
    with pytest.raises(UnknownVertex):
        tri.comb_distance(0, 99)


def test_sphere_and_ball(patch3):
    assert [len(patch3.sphere(0, n)) for n in range(4)] == [1, 6, 12, 18]
    assert len(patch3.ball(0, 2)) == 19


def test_boundaries_single_triangle(tri):
    assert tri.edge_boundary({0}) == {EdgeKey(0, 1), EdgeKey(1, 0),
                                      EdgeKey(0, 2), EdgeKey(2, 0)}
    assert tri.face_boundary({0}) == {(0, 1, 2)}
    assert tri.edge_boundary(tri.vertices) == set()
    assert tri.face_boundary(tri.vertices) == set()


def test_boundaries_patch_ball(patch3):
    B = patch3.ball(0, 1)
    brute_e = {(x, y) for x in patch3.vertices for y in patch3.neighbors(x)
               if (x in B) != (y in B)}
    assert {tuple(e) for e in patch3.edge_boundary(B)} == brute_e
    brute_f = set()
    for f in patch3.simplices(2):
        pairs = [(f[0], f[1]), (f[1], f[2]), (f[0], f[2])]
        if any((a in B) != (b in B) for a, b in pairs):
            brute_f.add(f)
    assert patch3.face_boundary(B) == brute_f
    # 6 spokes out of the hexagon twice each: 18 undirected edges
    assert len(brute_e) == 2 * 18


def test_boundary_of_complement(patch3):
    rng = np.random.default_rng(3)
    for _ in range(10):
        B = {v for v in patch3.vertices if rng.random() < 0.4}
        rest = set(patch3.vertices) - B
        assert patch3.edge_boundary(B) == patch3.edge_boundary(rest)


def test_invariants_exhaustive(zoo):
    for cx in zoo.values():
        for k, e in enumerate(cx.edge_keys()):
            assert cx.r_of(e.head, e.tail) == cx.r[k]
        for k in range(cx.n_faces):
            x, y, z = cx.face_vertices(k)
            for p, q in ((x, y), (y, z), (z, x)):
                cx.edge_sign(p, q)
            for perm in itertools.permutations((x, y, z)):
                assert cx.s_of(*perm) == cx.s[k]


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_triangle_inequality(data):
    R = data.draw(st.integers(1, 4))
    cx = regular_patch(R)
    vs = st.sampled_from(cx.vertices)
    x, y, z = data.draw(vs), data.draw(vs), data.draw(vs)
    assert cx.comb_distance(x, z) <= cx.comb_distance(x, y) + cx.comb_distance(y, z)


def test_immutable_weights(tri):
    with pytest.raises(ValueError):
        tri.c[0] = 5.0


def test_single_triangle_helper_weights():
    cx = single_triangle(c=2.0, r=3.0, s=4.0)
    assert cx.c_of(1) == 2.0 and cx.r_of(2, 0) == 3.0 and cx.s_of(1, 0, 2) == 4.0
