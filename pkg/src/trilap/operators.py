"""Difference operators, the Gauss-Bonnet operator and the Laplacians.

Two independent routes are provided:

* callables (``d0``, ``delta0``, ``d1``, ``delta1`` and their compositions)
  evaluate the defining sums simplex by simplex;
* :func:`assemble` builds sparse matrices acting on canonical coefficient
  vectors, from incidence arrays.

Tests compare the two routes against each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .cochains import Cochain, SimplexField, TripleField
from .complex import Triangulation

DENSE_LIMIT = 2000


class DimensionTooLarge(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# callables
# ---------------------------------------------------------------------------

def d0(f: Cochain) -> Cochain:
    """``d0 f (e) = f(e+) - f(e-)`` on canonical edges."""
    cx = f.complex
    v = f.values
    out = np.empty(cx.n_edges, dtype=complex)
    for k, (i, j) in enumerate(cx.edges):
        out[k] = v[j] - v[i]
    return Cochain(cx, 1, out)


def delta0(phi: Cochain) -> Cochain:
    """``delta0 phi (x) = 1/c(x) * sum over edges e with e+ = x of r(e) phi(e)``."""
    cx = phi.complex
    v = phi.values
    out = np.zeros(cx.n_vertices, dtype=complex)
    for x in range(cx.n_vertices):
        acc = 0j
        for y in cx.neighbor_indices(x):
            k, sign = cx.edge_index_sign(y, x)
            acc += cx.r[k] * sign * v[k]
        out[x] = acc / cx.c[x]
    return Cochain(cx, 0, out)


def d1(phi: Cochain) -> Cochain:
    """``d1 phi (x,y,z) = phi(x,y) + phi(y,z) + phi(z,x)``."""
    cx = phi.complex
    v = phi.values
    out = np.empty(cx.n_faces, dtype=complex)
    for k, (a, b, c) in enumerate(cx.faces):
        acc = 0j
        for p, q in ((a, b), (b, c), (c, a)):
            e, sign = cx.edge_index_sign(p, q)
            acc += sign * v[e]
        out[k] = acc
    return Cochain(cx, 2, out)


def delta1(psi: Cochain) -> Cochain:
    """``delta1 psi (e) = 1/r(e) * sum over apexes x of s(e,x) psi(e,x)``."""
    cx = psi.complex
    v = psi.values
    out = np.zeros(cx.n_edges, dtype=complex)
    for k, (i, j) in enumerate(cx.edges):
        acc = 0j
        for f in cx.edge_face_indices(k):
            a, b, c = cx.faces[f]
            # orientation of [i, j, apex] relative to the sorted triple
            if (i, j) == (a, b) or (i, j) == (b, c):
                sign = 1
            else:  # (i, j) == (a, c): [a, c, b] is odd
                sign = -1
            acc += cx.s[f] * sign * v[f]
        out[k] = acc / cx.r[k]
    return Cochain(cx, 1, out)


def gauss_bonnet(F: TripleField) -> TripleField:
    """``T(f, phi, psi) = (delta0 phi, d0 f + delta1 psi, d1 phi)``."""
    return TripleField(delta0(F.phi), d0(F.f) + delta1(F.psi), d1(F.phi))


def laplacian0(f: Cochain) -> Cochain:
    return delta0(d0(f))


def laplacian1_minus(phi: Cochain) -> Cochain:
    return d0(delta0(phi))


def laplacian1_plus(phi: Cochain) -> Cochain:
    return delta1(d1(phi))


def laplacian1(phi: Cochain) -> Cochain:
    return laplacian1_minus(phi) + laplacian1_plus(phi)


def laplacian2(psi: Cochain) -> Cochain:
    return d1(delta1(psi))


def laplacian(F: TripleField) -> TripleField:
    return TripleField(laplacian0(F.f), laplacian1(F.phi), laplacian2(F.psi))


# ---------------------------------------------------------------------------
# averages, wedge, derivation identities
# ---------------------------------------------------------------------------

def tilde(f: Cochain) -> SimplexField:
    """Edge average ``(f(e+) + f(e-)) / 2``; symmetric in the orientation."""
    cx = f.complex
    idx = np.array(cx.edges, dtype=np.int64).reshape(-1, 2)
    return SimplexField(cx, 1, 0.5 * (f.values[idx[:, 0]] + f.values[idx[:, 1]]))


def double_tilde(f: Cochain) -> SimplexField:
    """Face average ``(f(x) + f(y) + f(z)) / 3``."""
    cx = f.complex
    idx = np.array(cx.faces, dtype=np.int64).reshape(-1, 3)
    return SimplexField(cx, 2, f.values[idx].sum(axis=1) / 3.0)


def wedge_disc(psi: Cochain, phi: Cochain) -> Cochain:
    """Discrete exterior product of two 1-forms.

    ``(psi ^ phi)(x,y,z) = [psi(z,x) + psi(z,y)] phi(x,y)
    + [psi(x,y) + psi(x,z)] phi(y,z) + [psi(y,z) + psi(y,x)] phi(z,x)``
    """
    cx = psi.complex
    out = np.empty(cx.n_faces, dtype=complex)

    def ev(form, p, q):
        e, sign = cx.edge_index_sign(p, q)
        return sign * form.values[e]

    for k, (x, y, z) in enumerate(cx.faces):
        out[k] = ((ev(psi, z, x) + ev(psi, z, y)) * ev(phi, x, y)
                  + (ev(psi, x, y) + ev(psi, x, z)) * ev(phi, y, z)
                  + (ev(psi, y, z) + ev(psi, y, x)) * ev(phi, z, x))
    return Cochain(cx, 2, out)


@dataclass
class IdentityResiduals:
    """Max absolute residual of each product rule, overall and on the interior."""

    d1_product: float
    delta1_product: float
    d0_product: float
    delta0_product: float
    d1_product_interior: float
    delta1_product_interior: float
    d0_product_interior: float
    delta0_product_interior: float

    def worst(self, interior: bool = True) -> float:
        if interior:
            vals = (self.d1_product_interior, self.delta1_product_interior,
                    self.d0_product_interior, self.delta0_product_interior)
        else:
            vals = (self.d1_product, self.delta1_product, self.d0_product, self.delta0_product)
        return max(vals)

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


def _masked_max(res: np.ndarray, mask: np.ndarray) -> float:
    res = np.abs(res)
    sel = res[mask] if mask is not None else res
    return float(sel.max()) if sel.size else 0.0


def derivation_identity_checks(f: Cochain, phi: Cochain, psi: Cochain,
                               g: Cochain | None = None) -> IdentityResiduals:
    """Residuals of the product rules for ``d1``, ``delta1``, ``d0``, ``delta0``.

    * ``d1(f~ phi) = f~~ d1 phi + (d0 f ^ phi) / 6``
    * ``delta1(f~~ psi)(e) = f~(e) delta1 psi(e) + 1/(6 r(e)) sum_x s(e,x)
      [d0 f(e-,x) + d0 f(e+,x)] psi(e,x)``
    * ``d0(f g)(e) = f(e+) d0 g(e) + d0 f(e) g(e-)``
    * ``delta0(f~ phi)(x) = f(x) delta0 phi(x) - 1/(2 c(x)) sum_{e+=x}
      r(e) d0 f(e) phi(e)``
    """
    cx = f.complex
    if g is None:
        g = Cochain(cx, 0, np.roll(f.values, 1) + 1.0)
    ft, ftt = tilde(f), double_tilde(f)
    df = d0(f)

    r_d1 = (d1(phi.scaled_by(ft)).values - ftt.values * d1(phi).values
           - wedge_disc(df, phi).values / 6.0)

    lhs_delta1 = delta1(psi.scaled_by(ftt)).values
    d1psi = delta1(psi).values
    r_delta1 = np.empty(cx.n_edges, dtype=complex)
    for k, (i, j) in enumerate(cx.edges):
        u, v = cx.vertices[i], cx.vertices[j]
        acc = 0j
        for x in cx.face_ring(u, v):
            acc += cx.s_of(u, v, x) * (df(u, x) + df(v, x)) * psi(u, v, x)
        r_delta1[k] = lhs_delta1[k] - ft.values[k] * d1psi[k] - acc / (6.0 * cx.r[k])

    fg = Cochain(cx, 0, f.values * g.values)
    dfg, dg = d0(fg).values, d0(g).values
    idx = np.array(cx.edges, dtype=np.int64).reshape(-1, 2)
    rd0 = dfg - (f.values[idx[:, 1]] * dg + df.values * g.values[idx[:, 0]])

    lhs0 = delta0(phi.scaled_by(ft)).values
    dphi = delta0(phi).values
    rdelta0 = np.empty(cx.n_vertices, dtype=complex)
    for x in range(cx.n_vertices):
        acc = 0j
        for y in cx.neighbor_indices(x):
            k, sign = cx.edge_index_sign(y, x)
            acc += cx.r[k] * (sign * df.values[k]) * (sign * phi.values[k])
        rdelta0[x] = lhs0[x] - f.values[x] * dphi[x] + acc / (2.0 * cx.c[x])

    m0, m1, m2 = (cx.interior_mask(k) for k in range(3))
    return IdentityResiduals(
        d1_product=_masked_max(r_d1, None), delta1_product=_masked_max(r_delta1, None),
        d0_product=_masked_max(rd0, None),
        delta0_product=_masked_max(rdelta0, None),
        d1_product_interior=_masked_max(r_d1, m2), delta1_product_interior=_masked_max(r_delta1, m1),
        d0_product_interior=_masked_max(rd0, m1),
        delta0_product_interior=_masked_max(rdelta0, m0),
    )


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

OPERATOR_IDS = ("d0", "delta0", "d1", "delta1", "T", "L0", "L1-", "L1+",
                "L1", "L2", "L")


@dataclass
class OperatorMatrix:
    """Sparse matrix of an operator between weighted cochain spaces.

    ``source``/``target`` are the cochain degrees (or ``"H"`` for the direct
    sum); ``w_src``/``w_tgt`` are the inner-product weight diagonals.
    """

    name: str
    matrix: sp.csr_matrix
    source: int | str
    target: int | str
    w_src: np.ndarray
    w_tgt: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def apply(self, x):
        if isinstance(x, Cochain):
            return Cochain(x.complex, self.target, self.matrix @ x.values)
        if isinstance(x, TripleField):
            return TripleField.from_vector(x.complex, self.matrix @ x.to_vector())
        return self.matrix @ np.asarray(x)

    def weighted_adjoint(self) -> sp.csr_matrix:
        """``W_src^-1 A^H W_tgt``: the adjoint for the weighted products."""
        return (sp.diags(1.0 / self.w_src) @ self.matrix.conj().T
                @ sp.diags(self.w_tgt)).tocsr()

    def symmetrized(self) -> sp.csr_matrix:
        """``W^(1/2) A W^(-1/2)``; Hermitian when the operator is self-adjoint."""
        if self.w_src.shape != self.w_tgt.shape or not np.array_equal(
                self.w_src, self.w_tgt):
            raise ValueError(f"{self.name} is not an endomorphism")
        w = np.sqrt(self.w_src)
        return (sp.diags(w) @ self.matrix @ sp.diags(1.0 / w)).tocsr()


def _d0_matrix(cx: Triangulation) -> sp.csr_matrix:
    idx = np.array(cx.edges, dtype=np.int64).reshape(-1, 2)
    m = cx.n_edges
    rows = np.repeat(np.arange(m), 2)
    cols = idx.reshape(-1)
    data = np.tile([-1.0, 1.0], m)
    return sp.csr_matrix((data, (rows, cols)), shape=(m, cx.n_vertices))


def _delta0_matrix(cx: Triangulation) -> sp.csr_matrix:
    # canonical edge (i, j) feeds r/c(j) into j and, through (j, i), -r/c(i) into i
    idx = np.array(cx.edges, dtype=np.int64).reshape(-1, 2)
    m = cx.n_edges
    rows = np.concatenate([idx[:, 1], idx[:, 0]])
    cols = np.concatenate([np.arange(m), np.arange(m)])
    data = np.concatenate([cx.r / cx.c[idx[:, 1]], -cx.r / cx.c[idx[:, 0]]])
    return sp.csr_matrix((data, (rows, cols)), shape=(cx.n_vertices, m))


def _face_edge_incidence(cx: Triangulation):
    rows, cols, signs = [], [], []
    for k, (a, b, c) in enumerate(cx.faces):
        for p, q, sign in ((a, b, 1.0), (b, c, 1.0), (a, c, -1.0)):
            rows.append(k)
            cols.append(cx.edge_index_sign(p, q)[0])
            signs.append(sign)
    return (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
            np.array(signs))


def _d1_matrix(cx: Triangulation) -> sp.csr_matrix:
    rows, cols, signs = _face_edge_incidence(cx)
    return sp.csr_matrix((signs, (rows, cols)), shape=(cx.n_faces, cx.n_edges))


def _delta1_matrix(cx: Triangulation) -> sp.csr_matrix:
    rows, cols, signs = _face_edge_incidence(cx)
    data = signs * cx.s[rows] / cx.r[cols]
    return sp.csr_matrix((data, (cols, rows)), shape=(cx.n_edges, cx.n_faces))


def assemble(cx: Triangulation, op: str) -> OperatorMatrix:
    """Sparse matrix for operator ``op`` (one of :data:`OPERATOR_IDS`)."""
    w = [cx.c, cx.r, cx.s]
    wH = np.concatenate(w)
    if op == "d0":
        return OperatorMatrix(op, _d0_matrix(cx), 0, 1, w[0], w[1])
    if op == "delta0":
        return OperatorMatrix(op, _delta0_matrix(cx), 1, 0, w[1], w[0])
    if op == "d1":
        return OperatorMatrix(op, _d1_matrix(cx), 1, 2, w[1], w[2])
    if op == "delta1":
        return OperatorMatrix(op, _delta1_matrix(cx), 2, 1, w[2], w[1])
    D0, De0, D1, De1 = (_d0_matrix(cx), _delta0_matrix(cx), _d1_matrix(cx),
                        _delta1_matrix(cx))
    if op == "T":
        mat = sp.bmat([[None, De0, None], [D0, None, De1], [None, D1, None]],
                      format="csr")
        nv, ne, nf = cx.n_vertices, cx.n_edges, cx.n_faces
        # bmat drops empty blocks' dimensions when a row is all None
        mat.resize((nv + ne + nf, nv + ne + nf))
        return OperatorMatrix(op, mat, "H", "H", wH, wH)
    if op == "L0":
        return OperatorMatrix(op, (De0 @ D0).tocsr(), 0, 0, w[0], w[0])
    if op == "L1-":
        return OperatorMatrix(op, (D0 @ De0).tocsr(), 1, 1, w[1], w[1])
    if op == "L1+":
        return OperatorMatrix(op, (De1 @ D1).tocsr(), 1, 1, w[1], w[1])
    if op == "L1":
        return OperatorMatrix(op, (D0 @ De0 + De1 @ D1).tocsr(), 1, 1,
                              w[1], w[1])
    if op == "L2":
        return OperatorMatrix(op, (D1 @ De1).tocsr(), 2, 2, w[2], w[2])
    if op == "L":
        mat = sp.block_diag([De0 @ D0, D0 @ De0 + De1 @ D1, D1 @ De1],
                            format="csr")
        return OperatorMatrix(op, mat, "H", "H", wH, wH)
    raise KeyError(f"unknown operator {op!r}; expected one of {OPERATOR_IDS}")


def spectrum(opm: OperatorMatrix, k: int | None = None, which: str = "SA",
             dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    """Sorted real eigenvalues of a weighted self-adjoint operator.

    Dense below ``dense_limit``; above it ``k`` eigenvalues are computed with
    ARPACK's Lanczos solver and the full spectrum is refused.
    """
    n = opm.shape[0]
    S = opm.symmetrized()
    if n == 0:
        return np.zeros(0)
    if n <= dense_limit and k is None:
        A = S.toarray()
        A = 0.5 * (A + A.conj().T)
        return np.sort(np.linalg.eigvalsh(A))
    if k is None:
        raise DimensionTooLarge(
            f"dimension {n} exceeds dense limit {dense_limit}; pass k")
    if k >= n:
        raise DimensionTooLarge(f"k={k} must be smaller than dimension {n}")
    S = 0.5 * (S + S.conj().T)
    if not np.iscomplexobj(S.data) or not np.abs(S.data.imag).any():
        S = S.real
    try:
        vals = eigsh(S, k=k, which=which, return_eigenvectors=False,
                     maxiter=max(1000, 20 * n))
    except ArpackNoConvergence as exc:
        raise DimensionTooLarge(
            f"Lanczos did not converge: {len(exc.eigenvalues)} of {k} "
            f"eigenvalues found") from exc
    return np.sort(vals.real)
