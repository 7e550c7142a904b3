from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trilap.cochains import Cochain
from trilap.completeness import (COMPLETE, INCOMPLETE, UNKNOWN, DepthExceeded,
                                 PartitionViolation, SupportNotFinite,
                                 bounded_degree_cutoff, cutoff_sequence,
                                 degree_quantities, face_constant,
                                 graph_constant, offspring,
                                 offspring_hypothesis, offspring_verdict,
                                 ramp_values, series_cutoff,
                                 series_partial_sums, support_radius,
                                 support_sets, tree_face_bounds, xi_verdict)
from trilap.complex import single_triangle
from trilap.generators import (LayerSpec, OffspringSpec,
                               bipartite_layer_family, layered_triangulation,
                               regular_patch, triangular_tree)


@pytest.fixture(scope="module")
def patch9():
    return regular_patch(9)


@pytest.fixture(scope="module")
def poly2_tree():
    return triangular_tree(OffspringSpec.polynomial_floor(2), 5)


def test_bounded_cutoff_ramp(patch9):
    n = 3
    chi = bounded_degree_cutoff(patch9, 0, n)
    d = patch9.distances_from(0)
    assert np.all(chi.values[d <= n] == 1)
    assert np.all(chi.values[d >= 2 * n] == 0)
    assert np.allclose(chi.values[d == n + 1], 2 / 3)
    idx = np.array(patch9.edges)
    jumps = np.abs(chi.values[idx[:, 1]] - chi.values[idx[:, 0]])
    assert jumps.max() <= 1 / n + 1e-15
    # d0 chi vanishes on every edge meeting B_{n-1}
    near = (d[idx] <= n - 1).any(axis=1)
    assert np.all(jumps[near] == 0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_bounded_degree_constants(patch9, n):
    chi = bounded_degree_cutoff(patch9, 0, n)
    assert graph_constant(chi) <= 6 / n ** 2
    assert face_constant(chi) <= 12 / n ** 2


def test_graph_constant_examples(tri):
    assert graph_constant(Cochain(tri, 0, [1, 1, 1])) == 0
    assert face_constant(Cochain(tri, 0, [1, 1, 1])) == 0
    # indicator of one vertex: it meets two edges, each jumping by 1
    assert graph_constant(Cochain.from_dict(tri, 0, {0: 1})) == 2


def test_face_constant_by_hand(tri):
    chi = Cochain(tri, 0, [0.0, 0.5, 1.0])
    # edge (0,1), apex 2: |2*1 - 0 - 0.5|^2 = 2.25; edge (1,2), apex 0: 2.25;
    # edge (0,2), apex 1: 0
    assert face_constant(chi) == pytest.approx(2.25)


def test_saturated_cutoff_has_zero_energy(patch9):
    one = Cochain(patch9, 0, np.ones(patch9.n_vertices))
    assert graph_constant(one) == 0 and face_constant(one) == 0
    sets = support_sets(one, patch9.vertices)
    assert sets.Estar == set() and sets.Fstar == {}


def test_linear_ramp_for_unit_denominator():
    assert list(ramp_values(2, 6, [1] * 10)) == [1, 1, 1, 0, 0, 0, 0]
    vals = ramp_values(1, 5, [4] * 10)
    assert np.allclose(vals, [1, 1, 0.5, 0, 0, 0])


def test_support_radius_poly_two():
    off = OffspringSpec.polynomial_floor(2)
    acc, m = 0.0, 2
    while acc < 1:
        acc += 1 / math.sqrt(math.floor(m ** 2) + 1)
        m += 1
    assert support_radius(2, off) == m == 5


def test_series_cutoff_on_tree(poly2_tree):
    off = OffspringSpec.polynomial_floor(2)
    chi = series_cutoff(poly2_tree, 0, 2, off)
    for sphere in poly2_tree.layers:
        vals = {chi(v) for v in sphere}
        assert len(vals) == 1
    assert [chi(s[0]).real for s in poly2_tree.layers[:3]] == [1, 1, 1]
    assert chi(poly2_tree.layers[5][0]) == 0
    assert tree_face_bounds(chi, 2, off) == []
    short = triangular_tree(off, 4)
    with pytest.raises(SupportNotFinite):
        series_cutoff(short, 0, 2, off)


def test_tree_face_bounds_constant_offspring():
    off = OffspringSpec.constant(3)
    cx = triangular_tree(off, 6)
    chi = series_cutoff(cx, 0, 1, off)
    assert tree_face_bounds(chi, 1, off) == []


def test_cutoff_sequence_conditions(patch9):
    seq = cutoff_sequence(patch9, 0, [2, 3, 4])
    assert seq.violations() == []
    C, M = seq.constants()
    assert C <= 6 / 4 and M <= 12 / 4


def test_support_sets_window(patch9):
    n = 3
    chi = bounded_degree_cutoff(patch9, 0, n)
    sets = support_sets(chi, patch9.ball(0, n))
    d = patch9.distances_from(0)
    for e in sets.Estar:
        de = [d[patch9.vindex(v)] for v in e]
        assert n - 1 <= min(de) and max(de) <= 2 * n + 1
    prev = set()
    for m in range(1, 5):
        cur = support_sets(bounded_degree_cutoff(patch9, 0, m), patch9.ball(0, m)).E_n
        assert prev <= cur
        prev = cur


def test_offspring_measurement(poly2_tree):
    two = triangular_tree(OffspringSpec.constant(2), 4)
    assert [offspring(two, n) for n in range(4)] == [2, 2, 2, 2]
    assert offspring(poly2_tree, 3) == 10
    with pytest.raises(DepthExceeded):
        offspring(two, 4)
    assert offspring_hypothesis(poly2_tree) == 1


@pytest.mark.parametrize("alpha,status", [(0.5, COMPLETE), (1, COMPLETE),
                                          (2, COMPLETE), (2.01, INCOMPLETE),
                                          (3, INCOMPLETE)])
def test_alpha_classification(alpha, status):
    v = offspring_verdict(OffspringSpec.polynomial_floor(alpha))
    assert v.status == status
    assert ("alpha<=2" if status == COMPLETE else "alpha>2") in v.rule


def test_other_offspring_verdicts():
    assert offspring_verdict(OffspringSpec.constant(4)).status == COMPLETE
    assert offspring_verdict(OffspringSpec.geometric(1.5)).status == INCOMPLETE
    v = offspring_verdict(OffspringSpec.explicit([2, 3, 4]))
    assert v.status == UNKNOWN and len(v.partial_sums) == 2
    v = offspring_verdict(OffspringSpec.double_exponential())
    assert v.status == UNKNOWN and v.partial_sums[-1] < 1


def test_partial_sums_oracle():
    sums = series_partial_sums([1, 4, 16], 0, 3)
    assert sums == pytest.approx([1, 1.5, 1.75])


def test_tree_degrees_off_two():
    cx = triangular_tree(OffspringSpec.constant(2), 3)
    q = degree_quantities(cx, tree=True)
    for v in cx.layers[1]:
        i = cx.vindex(v)
        assert (q.deg_plus[i], q.deg_minus[i], q.deg_zero[i]) == (2, 1, 1)


def brute_layer_degrees(cx):
    """Independent scan over oriented neighbours: (deg+, deg-, deg0)."""
    layer = {v: n for n, s in enumerate(cx.layers) for v in s}
    out = {}
    for v in cx.vertices:
        counts = [0, 0, 0]
        for w in cx.neighbors(v):
            counts[{1: 0, -1: 1, 0: 2}[layer[w] - layer[v]]] += cx.r_of(v, w)
        out[v] = [c / cx.c_of(v) for c in counts]
    return out


def test_strip_degrees_by_hand():
    cx = layered_triangulation(LayerSpec((2, 2, 2)))
    q = degree_quantities(cx)
    brute = brute_layer_degrees(cx)
    for v in cx.vertices:
        i = cx.vindex(v)
        assert [q.deg_plus[i], q.deg_minus[i], q.deg_zero[i]] == brute[v]
    # layers [0,1], [2,3], [4,5]; vertex 3 sees 4 and 5 above and 1 below
    assert list(q.eta_plus) == [2, 2, 0]
    assert list(q.eta_minus) == [0, 2, 2]
    # cross edge (1,2) has apexes 0 and 3; intra edge (2,3) has one apex below
    # and one above
    assert q.beta[0] == 2
    assert q.gamma_minus[1] == 1 and q.gamma_plus[1] == 1
    assert np.nansum(q.deg2_zero) == 0


def test_bipartite_even_layers_have_no_gamma_zero():
    cx = bipartite_layer_family([1, 2, 4], 4)
    q = degree_quantities(cx)
    assert np.nansum(q.deg2_zero) == 0


def test_partition_violation():
    cx = single_triangle().with_meta(layers=[[0], [1], [2]])
    with pytest.raises(PartitionViolation):
        degree_quantities(cx)


def test_xi_verdicts():
    assert xi_verdict({"kind": "bounded"}).status == COMPLETE
    assert xi_verdict({"kind": "poly", "p": 2}).status == COMPLETE
    assert xi_verdict({"kind": "poly", "p": 3}).status == UNKNOWN
    assert xi_verdict(regular_patch(3)).status == COMPLETE
    assert xi_verdict(LayerSpec((3, 3, 3))).status == COMPLETE
    assert xi_verdict([1.0, 4.0, 9.0]).status == UNKNOWN


@settings(max_examples=50, deadline=None)
@given(st.one_of(
    st.floats(0, 10).map(lambda p: {"kind": "poly", "p": p}),
    st.lists(st.floats(0.1, 1e6), min_size=1, max_size=20),
    st.lists(st.integers(1, 4), min_size=2, max_size=6).map(LayerSpec),
))
def test_xi_never_incomplete(source):
    assert xi_verdict(source).status != INCOMPLETE


def test_verdict_json_shape():
    doc = offspring_verdict(OffspringSpec.polynomial_floor(3)).to_json()
    assert set(doc) >= {"status", "rule", "constants", "partial_sums"}
    assert set(doc["constants"]) == {"C", "M"}
