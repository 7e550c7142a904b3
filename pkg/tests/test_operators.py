from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trilap.cochains import (Cochain, TripleField, h_inner, h_norm, inner0, inner1,
                             inner2, norm, random_cochain, random_triple)
from trilap.generators import regular_patch
from trilap.operators import (OPERATOR_IDS, DimensionTooLarge, assemble, d0,
                              d1, delta0, delta1, derivation_identity_checks,
                              double_tilde, gauss_bonnet, laplacian,
                              laplacian0, laplacian1, laplacian1_minus,
                              laplacian1_plus, laplacian2, spectrum, tilde,
                              wedge_disc)

from conftest import family_zoo, reweighted

CALLABLES = {
    "d0": (d0, 0), "delta0": (delta0, 1), "d1": (d1, 1), "delta1": (delta1, 2),
    "L0": (laplacian0, 0), "L1-": (laplacian1_minus, 1),
    "L1+": (laplacian1_plus, 1), "L1": (laplacian1, 1), "L2": (laplacian2, 2),
}


def spmax(m) -> float:
    return float(abs(m).max()) if m.shape[0] and m.shape[1] else 0.0


# -- hand-computed examples on the unit triangle (x, y, z) = (0, 1, 2) --------

def test_d0_triangle_example(tri):
    f = Cochain(tri, 0, [0, 1, 2])
    df = d0(f)
    assert df(0, 1) == 1 and df(1, 2) == 1 and df(2, 0) == -2
    assert norm(d0(Cochain(tri, 0, [5, 5, 5]))) == 0


def test_d0_indicator_support(patch3):
    v = 4
    ind = Cochain.from_dict(patch3, 0, {v: 1})
    support = {frozenset(e) for e in d0(ind).support()}
    assert support == {frozenset((v, w)) for w in patch3.neighbors(v)}


def test_delta0_triangle_example(tri):
    phi = d0(Cochain.from_dict(tri, 0, {0: 1}))
    out = delta0(phi)
    assert np.allclose(out.values, [2, -1, -1])
    assert norm(delta0(Cochain.zeros(tri, 1))) == 0


def test_d1_triangle_cycle(tri):
    cycle = Cochain.from_dict(tri, 1, {(0, 1): 1, (1, 2): 1, (2, 0): 1})
    assert d1(cycle)(0, 1, 2) == 3
    assert d1(cycle)(1, 0, 2) == -3


def test_delta1_triangle_example(tri):
    out = delta1(Cochain.from_dict(tri, 2, {(0, 1, 2): 1}))
    assert out(0, 1) == 1 and out(1, 2) == 1 and out(2, 0) == 1


def test_triangle_laplacians(tri):
    assert np.allclose(spectrum(assemble(tri, "L0")), [0, 3, 3], atol=1e-14)
    psi = Cochain.from_dict(tri, 2, {(0, 1, 2): 1 - 2j})
    assert np.allclose(laplacian2(psi).values, 3 * psi.values)


def test_averages(tri):
    f = Cochain(tri, 0, [0, 1, 2])
    ft, ftt = tilde(f), double_tilde(f)
    assert ft(0, 1) == 0.5 and ft(1, 0) == 0.5
    assert ftt(0, 1, 2) == 1 and ftt(2, 1, 0) == 1
    k = Cochain(tri, 0, [4, 4, 4])
    assert np.allclose(tilde(k).values, 4) and np.allclose(double_tilde(k).values, 4)


def test_wedge_single_triangle_identity(tri):
    rng = np.random.default_rng(0)
    f = Cochain(tri, 0, rng.standard_normal(3))
    phi = random_cochain(tri, 1, seed=9)
    lhs = 6 * (d1(phi.scaled_by(tilde(f))).values
               - double_tilde(f).values * d1(phi).values)
    assert np.allclose(lhs, wedge_disc(d0(f), phi).values, atol=1e-13)
    assert norm(wedge_disc(phi, Cochain.zeros(tri, 1))) == 0


def test_wedge_antisymmetry(weighted_patch):
    for seed in range(20):
        a = random_cochain(weighted_patch, 1, seed=seed)
        b = random_cochain(weighted_patch, 1, seed=seed + 100)
        s = wedge_disc(a, b).values + wedge_disc(b, a).values
        assert np.abs(s).max() <= 1e-13


def test_gauss_bonnet_blocks(tri):
    zero = TripleField.zeros(tri)
    assert np.all(gauss_bonnet(zero).to_vector() == 0)
    f = Cochain(tri, 0, [1, -2, 0.5])
    out = gauss_bonnet(TripleField(f, Cochain.zeros(tri, 1), Cochain.zeros(tri, 2)))
    assert np.all(out.f.values == 0) and np.all(out.psi.values == 0)
    assert np.allclose(out.phi.values, d0(f).values)


# -- identities on every generated complex -------------------------------------

@pytest.mark.parametrize("name", list(family_zoo()))
def test_chain_complex_and_dual_route(name, zoo):
    cx = zoo[name]
    D0, De0, D1, De1 = (assemble(cx, op).matrix for op in ("d0", "delta0", "d1", "delta1"))
    assert spmax(D1 @ D0) <= 1e-14
    assert spmax(De0 @ De1) <= 1e-14
    for op, (fn, deg) in CALLABLES.items():
        a = random_cochain(cx, deg, seed=3)
        m = assemble(cx, op).apply(a).values
        ref = fn(a).values
        assert np.abs(m - ref).max(initial=0) <= 1e-12 * max(1, np.abs(ref).max(initial=0))
    T = assemble(cx, "T").matrix
    L = assemble(cx, "L").matrix
    assert spmax(T @ T - L) <= 1e-12
    F = random_triple(cx, seed=4)
    assert np.allclose(assemble(cx, "T").apply(F).to_vector(),
                       gauss_bonnet(F).to_vector(), atol=1e-12)
    assert np.allclose(assemble(cx, "L").apply(F).to_vector(),
                       laplacian(F).to_vector(), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3))
def test_adjointness_weighted(seed, R):
    cx = reweighted(regular_patch(R), seed)
    f = random_cochain(cx, 0, seed=seed)
    phi = random_cochain(cx, 1, seed=seed + 1)
    psi = random_cochain(cx, 2, seed=seed + 2)
    assert abs(inner1(d0(f), phi) - inner0(f, delta0(phi))) <= 1e-10 * norm(f) * norm(phi)
    assert abs(inner2(d1(phi), psi) - inner1(phi, delta1(psi))) <= 1e-10 * norm(phi) * norm(psi)
    F, G = random_triple(cx, seed), random_triple(cx, seed + 5)
    assert abs(h_inner(gauss_bonnet(F), G) - h_inner(F, gauss_bonnet(G))) <= 1e-10 * h_norm(F) * h_norm(G)


def test_delta_is_weighted_adjoint(weighted_patch):
    for a, b in (("d0", "delta0"), ("d1", "delta1")):
        A, B = assemble(weighted_patch, a), assemble(weighted_patch, b)
        assert abs(A.weighted_adjoint() - B.matrix).max() <= 1e-14


def test_nonnegativity_and_hodge(weighted_patch):
    cx = weighted_patch
    for seed in range(10):
        f = random_cochain(cx, 0, seed=seed)
        phi = random_cochain(cx, 1, seed=seed + 30)
        psi = random_cochain(cx, 2, seed=seed + 60)
        assert np.isclose(inner0(laplacian0(f), f), norm(d0(f)) ** 2)
        assert np.isclose(inner1(laplacian1(phi), phi),
                          norm(delta0(phi)) ** 2 + norm(d1(phi)) ** 2)
        assert np.isclose(inner2(laplacian2(psi), psi), norm(delta1(psi)) ** 2)
        a, b = d0(f), delta1(psi)
        assert abs(inner1(a, b)) <= 1e-12 * norm(a) * norm(b)
        assert np.isclose(norm(a + b) ** 2, norm(a) ** 2 + norm(b) ** 2)


def test_l0_row_sums_vanish(patch3):
    L0 = assemble(patch3, "L0").matrix
    assert np.abs(L0.sum(axis=1)).max() <= 1e-14


def test_spectrum_of_t_squares_to_l(weighted_patch):
    t = spectrum(assemble(weighted_patch, "T"))
    l = spectrum(assemble(weighted_patch, "L"))
    assert np.allclose(np.sort(t ** 2), l, atol=1e-8)
    assert l.min() >= -1e-10


def test_iterative_spectrum_matches_dense(patch3):
    opm = assemble(reweighted(patch3, 2), "L1")
    dense = spectrum(opm)
    it = spectrum(opm, k=6, which="LA", dense_limit=10)
    assert np.allclose(it, dense[-6:], atol=1e-8)
    with pytest.raises(DimensionTooLarge):
        spectrum(opm, dense_limit=10)


def test_unknown_operator(tri):
    with pytest.raises(KeyError):
        assemble(tri, "L3")
    assert len(OPERATOR_IDS) == 11


def test_derivation_identities(weighted_patch, tri):
    rng = np.random.default_rng(1)
    f = Cochain(weighted_patch, 0, rng.standard_normal(weighted_patch.n_vertices))
    res = derivation_identity_checks(f, random_cochain(weighted_patch, 1, seed=2),
                                     random_cochain(weighted_patch, 2, seed=3))
    assert res.worst(interior=True) <= 1e-10
    assert res.d0_product <= 1e-12
    const = Cochain(tri, 0, [2.0, 2.0, 2.0])
    res = derivation_identity_checks(const, random_cochain(tri, 1), random_cochain(tri, 2))
    assert res.d1_product <= 1e-14
