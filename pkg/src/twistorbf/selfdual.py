"""Exterior algebra of R^4, its anti-self-dual quotient, and the cyclic hull.

Everything in this module is exact finite-dimensional linear algebra: the
wedge structure constants are integers, the Hodge star is a signed
permutation of the subset basis, and the quotient / dual constructions keep
real rational coefficients.  Tests therefore compare against hand values and
exhaustive basis loops instead of loose tolerances.

Conventions fixed here once and used everywhere downstream:
  * basis e_I indexed by subsets I of {1,2,3,4}, degree-major order;
  * orientation vol = e1^e2^e3^e4, euclidean inner product making the e_I
    orthonormal (bilinear, extended complex-bilinearly);
  * star defined by a ^ star(b) = (a, b) vol, so star^2 = (-1)^k on k-forms
    (+id on even degrees, which is the only place it is used);
  * the quotient algebra keeps 1, the four e_mu and the anti-self-dual
    2-forms; its cyclic hull adjoins the dual with square-zero product.
"""

from __future__ import annotations

import itertools

import numpy as np

from .graded import BigradedSpace, Pairing, koszul_sign
from .radial import hermitian_inner, monomial
from .sphere import build_model

SUBSETS = [()]
for _k in range(1, 5):
    SUBSETS.extend(itertools.combinations((1, 2, 3, 4), _k))
SUBSETS = tuple(SUBSETS)
SUB_INDEX = {s: i for i, s in enumerate(SUBSETS)}
VOL_INDEX = SUB_INDEX[(1, 2, 3, 4)]


def _merge_sign(I, J):
    """Sign of sorting the concatenation I+J, or 0 if the subsets meet."""
    if set(I) & set(J):
        return 0
    inv = sum(1 for a in I for b in J if a > b)
    return -1 if inv % 2 else 1


class ExteriorAlgebra4:
    """Lambda^*(R^4) on the subset basis, with wedge, metric and star."""

    def __init__(self):
        n = len(SUBSETS)
        self.dim = n
        self.form_degree = np.array([len(s) for s in SUBSETS], dtype=int)
        wedge = np.zeros((n, n, n), dtype=np.int8)
        for i, I in enumerate(SUBSETS):
            for j, J in enumerate(SUBSETS):
                sgn = _merge_sign(I, J)
                if sgn:
                    wedge[i, j, SUB_INDEX[tuple(sorted(I + J))]] = sgn
        self.wedge_tensor = wedge
        star = np.zeros((n, n), dtype=np.int8)
        for i, I in enumerate(SUBSETS):
            Ic = tuple(sorted(set((1, 2, 3, 4)) - set(I)))
            # e_I ^ (s e_Ic) = vol fixes s = merge sign of (I, Ic)
            star[SUB_INDEX[Ic], i] = _merge_sign(I, Ic)
        self.star_matrix = star

    def basis_vector(self, I):
        v = np.zeros(self.dim)
        v[SUB_INDEX[tuple(sorted(I))]] = 1.0
        return v

    def wedge(self, x, y):
        return np.einsum("i,j,ijk->k", np.asarray(x), np.asarray(y),
                         self.wedge_tensor)

    def inner(self, x, y):
        # bilinear, not hermitian: pairs with the star identity below
        return np.asarray(x) @ np.asarray(y)

    def star(self, x):
        return self.star_matrix @ np.asarray(x)

    def degree_component(self, x, k):
        out = np.array(x, dtype=complex)
        out[self.form_degree != k] = 0.0
        return out


EXT4 = ExteriorAlgebra4()


def hodge_star(x):
    return EXT4.star(x)


def sd_asd_split(two_form):
    """Split a 2-form into its +1 and -1 star eigencomponents."""
    x = np.asarray(two_form, dtype=complex)
    if np.abs(x[EXT4.form_degree != 2]).max(initial=0.0) > 1e-13:
        raise ValueError("input must be a 2-form")
    sx = EXT4.star(x)
    return (x + sx) / 2.0, (x - sx) / 2.0


def _pm_basis(sign):
    out = []
    for j in (2, 3, 4):
        v = EXT4.basis_vector((1, j)).astype(complex)
        out.append(v + sign * EXT4.star(v))
    return out

LAMBDA2_PLUS = _pm_basis(+1)    # e12+e34, e13-e24, e14+e23
LAMBDA2_MINUS = _pm_basis(-1)   # e12-e34, e13+e24, e14-e23


class AAlgebra:
    """Quotient of Lambda^*(R^4) by the ideal (Lambda^2_+ + Lambda^3 + Lambda^4).

    Underlying space R + Lambda^1 + Lambda^2_-, dims 1+4+3, with bidegrees
    (0,0), (3,2), (6,4).  The product is wedge followed by the quotient
    projection; in particular two 1-forms multiply to the anti-self-dual part
    of their wedge, and everything of reduced degree > 2 dies.
    """

    labels = ("1", "e1", "e2", "e3", "e4", "f1", "f2", "f3")

    def __init__(self):
        self.dim = 8
        degs = [(0, 0)] + [(3, 2)] * 4 + [(6, 4)] * 3
        self.space = BigradedSpace(self.labels, degs)
        emb = np.zeros((16, 8), dtype=complex)
        emb[SUB_INDEX[()], 0] = 1.0
        for mu in range(4):
            emb[SUB_INDEX[(mu + 1,)], 1 + mu] = 1.0
        for i, f in enumerate(LAMBDA2_MINUS):
            emb[:, 5 + i] = f
        self.embedding = emb
        proj = np.zeros((8, 16), dtype=complex)
        proj[0, SUB_INDEX[()]] = 1.0
        for mu in range(4):
            proj[1 + mu, SUB_INDEX[(mu + 1,)]] = 1.0
        for i, f in enumerate(LAMBDA2_MINUS):
            # f_i are orthogonal of squared norm 2; (1-*)/2 is built into
            # pairing against f_i since (B, f_i) kills the self-dual part
            proj[5 + i] = f / 2.0
        self.projection = proj
        c = np.zeros((8, 8, 8), dtype=complex)
        for i in range(8):
            for j in range(8):
                c[i, j] = proj @ EXT4.wedge(emb[:, i], emb[:, j])
        assert np.abs(c.imag).max() == 0.0
        self.structure = c.real
        self.unit = np.zeros(8)
        self.unit[0] = 1.0

    def multiply(self, x, y):
        return np.einsum("i,j,ijk->k", np.asarray(x), np.asarray(y),
                         self.structure)

    def from_form(self, x):
        return self.projection @ np.asarray(x, dtype=complex)

    def to_form(self, a):
        return self.embedding @ np.asarray(a, dtype=complex)


def a_multiply(x, y, algebra=None):
    alg = algebra if algebra is not None else A_ALG
    return alg.multiply(x, y)


A_ALG = AAlgebra()


class UAlgebra:
    """Cyclic hull: the quotient algebra plus its dual as a square-zero ideal.

    Basis = the 8 quotient basis vectors followed by their duals.  The dual
    of a bidegree-(k,l) vector sits in bidegree (11-k, 8-l), so reduced
    degrees run 0..3 with dims (1,7,7,1).  The algebra part acts on the dual
    part by the transpose of its own multiplication, twisted by the Koszul
    sign on the left; duals multiply to zero.  The trace reads off the
    coefficient of the dual of the unit, and the induced pairing
    tr(x y) is the canonical duality, graded symmetric and nondegenerate.
    """

    def __init__(self, a_algebra=None):
        self.a = a_algebra if a_algebra is not None else A_ALG
        na = self.a.dim
        self.dim = 2 * na
        labels = list(self.a.labels) + [lab + "*" for lab in self.a.labels]
        degs = list(self.a.space.degrees)
        degs += [(11 - d.k, 8 - d.l) for d in self.a.space.degrees]
        self.space = BigradedSpace(labels, degs)
        red = self.space.reduced_degrees()
        c = np.zeros((self.dim, self.dim, self.dim))
        ca = self.a.structure
        c[:na, :na, :na] = ca
        for m in range(na):
            for j in range(na):
                for i in range(na):
                    if ca[j, i, m] == 0.0:
                        continue
                    # right action: (xi^m . a_j)(a_i) = xi^m(a_j a_i)
                    c[na + m, j, na + i] = ca[j, i, m]
                    sgn = koszul_sign(red[j], red[na + m])
                    c[j, na + m, na + i] = sgn * ca[j, i, m]
        self.structure = c
        self.unit = np.zeros(self.dim)
        self.unit[0] = 1.0
        self.trace_index = na  # dual of the unit

    def multiply(self, x, y):
        return np.einsum("i,j,ijk->k", np.asarray(x), np.asarray(y),
                         self.structure)

    def trace(self, x):
        return np.asarray(x)[self.trace_index]

    def pairing(self):
        mat = self.structure[:, :, self.trace_index]
        return Pairing(self.space, mat, parity=3)

    def reduced_dims(self):
        red = self.space.reduced_degrees()
        return {r: int((red == r).sum()) for r in sorted(set(red.tolist()))}


def u_multiply(x, y, algebra=None):
    alg = algebra if algebra is not None else U_ALG
    return alg.multiply(x, y)


def u_trace(x, algebra=None):
    alg = algebra if algebra is not None else U_ALG
    return alg.trace(x)


U_ALG = UAlgebra()


# ---------------------------------------------------------------------------
# spinor model: W+ and W- are copies of C^2 with the standard symplectic
# form; a euclidean vector becomes the 2x2 matrix x4 Id + i x.sigma, whose
# determinant is |x|^2.  Contracting a pair of such matrices over one factor
# with the symplectic form lands in Sym^2 of the other factor, and the two
# contractions see exactly one of the star eigenspaces each.

PAULI = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)

EPS = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)


def spinor_matrix(x):
    """2x2 matrix of a euclidean 4-vector; det = |x|^2."""
    x = np.asarray(x, dtype=complex)
    m = x[3] * np.eye(2, dtype=complex)
    for i in range(3):
        m = m + 1.0j * x[i] * PAULI[i]
    return m


_SPIN1 = [spinor_matrix(np.eye(4)[mu]) for mu in range(4)]


def _contract_rows(mu, nu):
    # contract the W+ (row) indices with eps: lands in Sym^2 W-
    a, b = _SPIN1[mu], _SPIN1[nu]
    return a.T @ EPS @ b - b.T @ EPS @ a


def _contract_cols(mu, nu):
    # contract the W- (column) indices with eps: lands in Sym^2 W+
    a, b = _SPIN1[mu], _SPIN1[nu]
    return a @ EPS @ b.T - b @ EPS @ a.T


def _two_form_map(contract, omega):
    out = np.zeros((2, 2), dtype=complex)
    x = np.asarray(omega, dtype=complex)
    for idx, I in enumerate(SUBSETS):
        if len(I) != 2 or x[idx] == 0.0:
            continue
        out = out + x[idx] * contract(I[0] - 1, I[1] - 1)
    return out


class SpinorSpaces:
    """Fixed spinor identifications for 1-forms and the 2-form eigenspaces.

    psi1 sends a complexified 1-form to its 2x2 matrix (rows = W+, columns =
    W-).  Of the two symplectic contractions of a matrix pair, one kills the
    self-dual 2-forms and one kills the anti-self-dual ones; the constructor
    measures which is which, pins the labels psi_plus / psi_minus so that
    each is invertible on its own eigenspace, and refuses to build if the
    separation is not clean.
    """

    def __init__(self, tol=1e-12):
        cand = {"rows": _contract_rows, "cols": _contract_cols}
        support = {}
        for name, fn in cand.items():
            on_plus = max(np.abs(_two_form_map(fn, v)).max()
                          for v in LAMBDA2_PLUS)
            on_minus = max(np.abs(_two_form_map(fn, v)).max()
                           for v in LAMBDA2_MINUS)
            support[name] = (on_plus, on_minus)
        plus_name = None
        minus_name = None
        for name, (p, m) in support.items():
            if p > tol and m <= tol:
                plus_name = name
            if m > tol and p <= tol:
                minus_name = name
        if plus_name is None or minus_name is None or plus_name == minus_name:
            raise RuntimeError("contraction labels did not separate: %r"
                               % support)
        self._plus = cand[plus_name]
        self._minus = cand[minus_name]
        self.plus_variant = plus_name
        self.minus_variant = minus_name
        for basis, fn in ((LAMBDA2_PLUS, self._plus),
                          (LAMBDA2_MINUS, self._minus)):
            mats = [self._sym_coords(_two_form_map(fn, v)) for v in basis]
            if np.linalg.matrix_rank(np.array(mats), tol=1e-9) != 3:
                raise RuntimeError("spinor map degenerate on its eigenspace")

    @staticmethod
    def _sym_coords(m):
        return np.array([m[0, 0], m[0, 1] + m[1, 0], m[1, 1]])

    def psi1(self, one_form):
        x = np.asarray(one_form, dtype=complex)
        return sum(x[SUB_INDEX[(mu,)]] * m
                   for mu, m in zip((1, 2, 3, 4), _SPIN1))

    def psi_plus(self, two_form):
        return _two_form_map(self._plus, two_form)

    def psi_minus(self, two_form):
        return _two_form_map(self._minus, two_form)


SPIN = SpinorSpaces()


def lambda2_minus_action(b_coords, v_coords, algebra=None):
    """Action of an anti-self-dual 2-form on a 1-form, via the metric.

    Defined as the adjoint of wedging: (B o v, w) = (B, v ^ w) for all w.
    This is the finite-dimensional shadow of the 'rotation acts on vectors'
    picture and is what the spinor contraction must reproduce.
    """
    B = sum(c * f for c, f in zip(np.asarray(b_coords, dtype=complex),
                                  LAMBDA2_MINUS))
    v = np.zeros(16, dtype=complex)
    for mu in range(4):
        v[SUB_INDEX[(mu + 1,)]] = np.asarray(v_coords, dtype=complex)[mu]
    out = np.zeros(4, dtype=complex)
    for mu in range(4):
        w = EXT4.basis_vector((mu + 1,))
        out[mu] = EXT4.inner(B, EXT4.wedge(v, w))
    return out


def spinor_intertwiner_report():
    """Fit the one free scalar between the metric action and the contraction.

    For every basis pair (B in Lambda^2_-, e_mu) compares psi1(B o e_mu)
    against psi1(e_mu) @ (EPS @ psi_minus(B)) and against the variant with
    the factors swapped; returns the variant, the fitted scalar and the
    worst absolute residual.  One global scalar must make all 12 pairs
    match, otherwise the conventions are wired wrong.
    """
    targets = []
    cands = {"eps_s": [], "s_eps": []}
    for b in np.eye(3):
        S = SPIN.psi_minus(sum(c * f for c, f in zip(b, LAMBDA2_MINUS)))
        for mu in range(4):
            acted = lambda2_minus_action(b, np.eye(4)[mu])
            targets.append(sum(c * m for c, m in zip(acted, _SPIN1)).ravel())
            M = _SPIN1[mu]
            cands["eps_s"].append((M @ (EPS @ S)).ravel())
            cands["s_eps"].append((M @ (S @ EPS)).ravel())
    t = np.concatenate(targets)
    best = None
    for name, rows in cands.items():
        c = np.concatenate(rows)
        denom = np.vdot(c, c).real
        scalar = np.vdot(c, t) / denom if denom > 0 else 0.0
        resid = float(np.abs(t - scalar * c).max())
        if best is None or resid < best[2]:
            best = (name, scalar, resid)
    return {"variant": best[0], "scalar": complex(best[1]),
            "residual": best[2]}


# ---------------------------------------------------------------------------
# identification of the cyclic hull with the cohomology of the sphere
# complex: dimensions per degree, and the product on the degree-one part.

_O_PART = ((0, 1, 0), (1, 2, 1), (2, 1, 2))       # (twist, multiplicity, degree)
_W_PART = ((-4, 1, 1), (-3, 2, 2), (-2, 1, 3))


def _section_product_coeffs(model1, model2):
    """Exact expansion of products of twist-1 holomorphic sections in twist 2.

    Returns P[a, b, c] with s_a s_b = sum_c P[a,b,c] t_c, computed with the
    closed-form integrals (no grids), where s runs over the level-0 basis of
    the twist-1 model and t over the level-0 basis of the twist-2 model.
    """
    s_funs = [model1.funs0[i] for i in range(model1.dim0)
              if model1.level0[i] == 0]
    t_funs = [model2.funs0[i] for i in range(model2.dim0)
              if model2.level0[i] == 0]
    P = np.zeros((len(s_funs), len(s_funs), len(t_funs)), dtype=complex)
    for a, fa in enumerate(s_funs):
        for b, fb in enumerate(s_funs):
            prod = fa.mul(fb)
            for c, tc in enumerate(t_funs):
                P[a, b, c] = hermitian_inner(prod, tc, model2.n + 2)
            # products of level-0 sections must stay in the level-0 sector
            norm2 = hermitian_inner(prod, prod, model2.n + 2).real
            if abs(norm2 - np.abs(P[a, b]).dot(np.abs(P[a, b]))) > 1e-12:
                raise RuntimeError("section product leaked out of H0")
    return P, s_funs, t_funs


def check_u_cohomology_iso(truncation=12, tol=1e-9):
    """Dimension and product match between the cyclic hull and cohomology.

    Builds the six line bundle models entering the graded pieces, checks the
    graded dimensions (1,4,3) on the holomorphic side and (3,4,1) on the
    dual-twist side against the hull, then compares the induced product of
    two degree-one classes with the quotient-algebra product of 1-forms up
    to an invertible change of basis.  Dimension mismatches raise: they mean
    a wiring bug, not a numerical issue.
    """
    o_dims = {}
    for n, mult, deg in _O_PART:
        h0, h1 = build_model(n, truncation).serre_dims()
        if h1 != 0:
            raise RuntimeError("unexpected H1 for twist %d" % n)
        o_dims[deg] = o_dims.get(deg, 0) + mult * h0
    w_dims = {}
    for n, mult, deg in _W_PART:
        h0, h1 = build_model(n, truncation).serre_dims()
        if h0 != 0:
            raise RuntimeError("unexpected H0 for twist %d" % n)
        w_dims[deg] = w_dims.get(deg, 0) + mult * h1
    if (o_dims != {0: 1, 1: 4, 2: 3}) or (w_dims != {1: 3, 2: 4, 3: 1}):
        raise RuntimeError("graded dimensions off: %r / %r"
                           % (o_dims, w_dims))
    total = {r: o_dims.get(r, 0) + w_dims.get(r, 0) for r in range(4)}
    if total != U_ALG.reduced_dims():
        raise RuntimeError("hull dimensions off: %r" % total)

    # product side: degree-one classes form W+ (x) H0(O(1)); two of them
    # multiply through the odd generators, contracting W+ with EPS and
    # multiplying sections pointwise
    m1 = build_model(1, truncation)
    m2 = build_model(2, truncation)
    P, s_funs, t_funs = _section_product_coeffs(m1, m2)
    ns = len(s_funs)
    nt = len(t_funs)

    # spinor route into the doublet: 1-form -> matrix rows W+, columns W-;
    # W- basis maps to sections -z, 1, expanded exactly in the model basis
    sig = np.zeros((ns, 2), dtype=complex)
    for i, f in enumerate(s_funs):
        sig[i, 0] = -hermitian_inner(monomial(1, 0), f, m1.n + 2)
        sig[i, 1] = hermitian_inner(monomial(0, 0), f, m1.n + 2)
    S = np.zeros((2, ns, 4), dtype=complex)   # W+ index, section index, mu
    for mu in range(4):
        S[:, :, mu] = _SPIN1[mu] @ sig.T

    b_pairs = np.einsum("aim,bjn,ab,ijc->mnc", S, S, EPS, P)
    a_pairs = np.zeros((4, 4, 3))
    for mu in range(4):
        for nu in range(4):
            a_pairs[mu, nu] = A_ALG.multiply(np.eye(8)[1 + mu],
                                             np.eye(8)[1 + nu])[5:]

    flatA = a_pairs.reshape(16, 3)
    flatB = b_pairs.reshape(16, nt)
    rank = int(np.linalg.matrix_rank(flatB, tol=1e-9))
    Tt, _, _, _ = np.linalg.lstsq(flatA, flatB, rcond=None)
    resid = float(np.abs(flatA @ Tt - flatB).max())
    scale = float(np.abs(flatB).max())
    svals = np.linalg.svd(Tt.T, compute_uv=False)
    report = {
        "o_dims": o_dims,
        "w_dims": w_dims,
        "total_dims": total,
        "o_total": sum(o_dims.values()),
        "w_total": sum(w_dims.values()),
        "product_rank": rank,
        "basis_change_residual": resid / scale if scale > 0 else resid,
        "basis_change_condition": float(svals[0] / svals[-1]),
        "pass": rank == 3 and resid <= tol * max(scale, 1.0)
                and svals[-1] > 1e-9,
    }
    return report
