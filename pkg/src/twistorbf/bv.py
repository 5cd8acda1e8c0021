"""Cubic matrix action on the truncated sheaf complex and its master
equation.

The action is S(a) = (1/2) <a, d a> + (1/6) <a a a>, where <.> is the
trace functional of the complex extended to matrix coefficients by the
matrix trace, d is the antiholomorphic differential, and a is an odd
field.  Odd means odd total degree: components of even cohomological
degree enter multiplied by auxiliary odd generators, so a generic field
point lives in the tensor product with a finite Grassmann algebra and
touches every degree.

Fields are truncation coefficients, but the integrals are evaluated on
the quadrature grid, where multiplication is honest pointwise
multiplication of sections.  The basis-projected product of the complex
is not associative (projecting an intermediate product cuts its upper
levels), and the quartic term of {S, S} feels exactly that: evaluated
through projected intermediates it misses zero by the coupling of two
cut tails.  On the grid the product is associative and the quadrature is
exact for the quartic integrands, so the identities the master equation
rests on (the trace kills d-exact elements, the pairing is graded
symmetric, the trace of a product is cyclic) hold to roundoff.

The variation of S pairs against the curvature Q(a) = d a + (1/2) a a
with constant one (fitted on a random direction and reported, never
used), and {S, S} contracts the variation with Q again, so the reported
residual is the trace pairing <Q Q> against the unsigned size of the
terms that have to cancel.

Auxiliary generators are kept as bit masks; moving a generator past a
coefficient of odd internal parity costs a sign, and merging two masks
costs the usual interleaving sign.
"""

import numpy as np

from .gcomplex import GComplex, _mult_tensor

__all__ = [
    "BFData", "SuperField", "bv_action", "master_equation_residual",
    "trace_cyclicity_residual", "action_expansion_oracle",
]


def _popcount(mask):
    return bin(mask).count("1")


def _interleave_sign(s, t):
    """Sign of sorting the generator product theta_s theta_t, s, t disjoint."""
    sign = 1
    rest = s
    while rest:
        low = rest & -rest
        # generators of t below this one must move past it
        if _popcount(t & (low - 1)) % 2:
            sign = -sign
        rest ^= low
    return sign


def _term_sign(s, t, parity_y):
    """Sign of (c_s theta_s)(c_t theta_t) -> (c_s c_t) theta_{s|t}."""
    sign = _interleave_sign(s, t)
    if _popcount(s) % 2 and (parity_y + _popcount(t)) % 2:
        sign = -sign
    return sign


class SuperField(object):
    """Element of the complex with odd auxiliary coefficients.

    terms maps a bit mask of generators to a coefficient array; parity is
    the total degree mod 2, so the coefficient at mask S carries internal
    parity (parity + |S|) mod 2.  The same container holds truncation
    coefficients of shape (dim, k, k) and grid samples of shape
    (gdim, k, k).
    """

    __slots__ = ("terms", "parity")

    def __init__(self, terms, parity):
        self.terms = {s: np.asarray(c, dtype=complex)
                      for s, c in terms.items() if np.any(c)}
        self.parity = int(parity) % 2

    def scaled(self, factor):
        return SuperField({s: factor * c for s, c in self.terms.items()},
                          self.parity)

    def plus(self, other):
        if other.parity != self.parity:
            raise ValueError("parity mismatch in field sum")
        out = {s: c.copy() for s, c in self.terms.items()}
        for s, c in other.terms.items():
            out[s] = out[s] + c if s in out else c
        return SuperField(out, self.parity)


class BFData(object):
    """Truncated complex with matrix coefficients, trace pairing and
    differential, ready for action and master equation evaluation.

    The pairing must be nondegenerate; the extended complex is refused
    for that reason (its resolution columns pair with nothing).
    """

    def __init__(self, source, rank=2, cubic=True, n_aux=6, pairing=None,
                 dbar=None, tol=1e-8):
        if not isinstance(source, GComplex):
            raise TypeError("source must be a GComplex")
        if source.extended and pairing is None:
            raise ValueError(
                "trace pairing is degenerate on the extended complex; "
                "build the data on the plain one")
        self.g = source
        self.rank = int(rank)
        self.cubic = bool(cubic)
        self.n_aux = int(n_aux)
        self.dim = source.dim
        if pairing is None:
            pairing = source.pairing_matrix().matrix
        self.pairing = np.asarray(pairing, dtype=complex)
        svals = np.linalg.svd(self.pairing, compute_uv=False)
        if svals.size == 0 or svals[0] == 0 or svals[-1] <= tol * svals[0]:
            raise ValueError(
                "degenerate trace pairing: smallest singular value %.3e "
                "of %.3e" % (svals[-1] if svals.size else 0.0,
                             svals[0] if svals.size else 0.0))
        self.pairing_norm = svals[0]
        self.dbar = np.asarray(source.dbar_full if dbar is None else dbar)
        red = source.space.reduced_degrees()
        self.parity_mask = (np.asarray(red) % 2).astype(bool)
        self._build_grid_tables()

    def _build_grid_tables(self):
        g = self.g
        grid = g.grid
        self._gvals = {}
        self._goffsets = {}
        pos = 0
        for bi, b in enumerate(g.blocks):
            for q in (0, 1):
                vals, _ = b.model.grid_data(grid, q)
                self._gvals[(bi, q)] = vals
                self._goffsets[(bi, q)] = pos
                pos += b.mult * grid.w.size
        self.gdim = pos
        self._ngrid = grid.w.size
        self._trace_block = g._find_block(ext=2, hom=0, part="w")
        self._trace_weights = 2.0j * grid.w / grid.D ** 2
        red = np.asarray(g.space.reduced_degrees())
        self._piece_parity = {
            (bi, q): int(red[g.block_slice(bi, q).start]) % 2
            for bi in range(len(g.blocks)) for q in (0, 1)}
        # product wiring shared by every grid multiplication
        self._gterms = []
        for bx in range(len(g.blocks)):
            for by in range(len(g.blocks)):
                bt = g._target_block(bx, by)
                if bt is None:
                    continue
                mt = _mult_tensor(g.blocks[bx].mult_label,
                                  g.blocks[by].mult_label)
                if mt is None:
                    continue
                for qx in (0, 1):
                    for qy in (0, 1):
                        if qx + qy > 1:
                            continue
                        self._gterms.append(
                            (bx, qx, by, qy, bt, qx + qy,
                             g._sign(bx, qx, by, qy), mt))

    # -- field sampling ---------------------------------------------------

    def _component(self, rng, odd_part):
        k = self.rank
        c = rng.standard_normal((self.dim, k, k)) \
            + 1j * rng.standard_normal((self.dim, k, k))
        c[self.parity_mask != bool(odd_part)] = 0.0
        return c

    def random_field(self, rng):
        """Generic odd field point: odd-degree components with plain
        coefficients, even-degree ones riding single odd generators."""
        terms = {0: self._component(rng, True)}
        for m in range(self.n_aux):
            terms[1 << m] = self._component(rng, False)
        return SuperField(terms, 1)

    def matrix_element(self, rng, parity):
        """Plain matrix-valued element of fixed internal parity."""
        return self._component(rng, bool(parity))

    # -- coefficient-space operations -------------------------------------

    def apply_dbar(self, x):
        """Differential applied coefficientwise; flips total parity."""
        out = {s: (self.dbar @ c.reshape(self.dim, -1)).reshape(c.shape)
               for s, c in x.terms.items()}
        return SuperField(out, x.parity + 1)

    def trace_value(self, c):
        """Trace functional of a plain matrix-valued element."""
        return np.einsum("a,app->", self.g.trace_vector, c)

    # -- grid representation ----------------------------------------------

    def gpiece(self, gc, bi, q):
        b = self.g.blocks[bi]
        start = self._goffsets[(bi, q)]
        seg = gc[start:start + b.mult * self._ngrid]
        return seg.reshape((b.mult, self._ngrid) + gc.shape[1:])

    def to_grid(self, c):
        """Sample a coefficient vector on the quadrature grid."""
        c = np.asarray(c, dtype=complex)
        return self._stack_to_grid(c[None])[0]

    def _stack_to_grid(self, cs):
        """(A, dim, k, k) coefficient stack -> (A, gdim, k, k) samples."""
        a, k = cs.shape[0], cs.shape[-1]
        out = np.zeros((a, self.gdim, k, k), dtype=complex)
        for bi, b in enumerate(self.g.blocks):
            for q in (0, 1):
                sl = self.g.block_slice(bi, q)
                seg = cs[:, sl].reshape(a, b.mult, -1, k, k)
                vals = self._gvals[(bi, q)]
                z = np.moveaxis(seg, 2, -1).reshape(-1, vals.shape[0]) \
                    @ vals
                z = np.moveaxis(
                    z.reshape(a, b.mult, k, k, self._ngrid), -1, 2)
                st = self._goffsets[(bi, q)]
                out[:, st:st + b.mult * self._ngrid] = z.reshape(
                    a, -1, k, k)
        return out

    def field_to_grid(self, x):
        masks = sorted(x.terms)
        gs = self._stack_to_grid(np.stack([x.terms[s] for s in masks]))
        return SuperField(dict(zip(masks, gs)), x.parity)

    def _mask_tables(self, x, y):
        mx = sorted(x.terms)
        my = sorted(y.terms)
        sgn = np.zeros((len(mx), len(my)))
        tgt = {}
        for a, s in enumerate(mx):
            for b, t in enumerate(my):
                if s & t:
                    continue
                sgn[a, b] = _term_sign(s, t, y.parity)
                tgt.setdefault(s | t, []).append((a, b))
        return mx, my, sgn, tgt

    def _gpiece_stack(self, stacked, bi, q):
        b = self.g.blocks[bi]
        start = self._goffsets[(bi, q)]
        seg = stacked[:, start:start + b.mult * self._ngrid]
        return seg.reshape(
            (stacked.shape[0], b.mult, self._ngrid) + stacked.shape[2:])

    def _mask_split(self, masks, parity):
        """Mask positions by internal parity of their coefficients."""
        out = {0: [], 1: []}
        for i, s in enumerate(masks):
            out[(parity + _popcount(s)) % 2].append(i)
        return out

    def gmult(self, x, y):
        """Pointwise product of grid fields; exact, associative."""
        mx, my, sgn, tgt = self._mask_tables(x, y)
        k = self.rank
        xs = np.stack([x.terms[s] for s in mx])
        ys = np.stack([y.terms[t] for t in my])
        xsplit = self._mask_split(mx, x.parity)
        ysplit = self._mask_split(my, y.parity)
        acc = {s: np.zeros((self.gdim, k, k), dtype=complex) for s in tgt}
        for bx, qx, by, qy, bt, qt, psgn, mt in self._gterms:
            ia = xsplit[self._piece_parity[(bx, qx)]]
            ib = ysplit[self._piece_parity[(by, qy)]]
            if not ia or not ib:
                continue
            xp = self._gpiece_stack(xs[ia], bx, qx)
            yp = self._gpiece_stack(ys[ib], by, qy)
            apos = {a: i for i, a in enumerate(ia)}
            bpos = {b: i for i, b in enumerate(ib)}
            rows_by_tgt = {}
            for s, pairs in tgt.items():
                rows = [(apos[a], bpos[b], sgn[a, b]) for a, b in pairs
                        if a in apos and b in bpos]
                if rows:
                    rows_by_tgt[s] = rows
            if not rows_by_tgt:
                continue
            mm, mn, mc = mt.shape
            for m in range(mm):
                for n in range(mn):
                    w = mt[m, n]
                    if not np.any(w):
                        continue
                    # (A,1,g,k,k) @ (1,B,g,k,k), matrix factors in order
                    prod = np.matmul(xp[:, None, m], yp[None, :, n])
                    for s, rows in rows_by_tgt.items():
                        seg = self.gpiece(acc[s], bt, qt)
                        part = 0.0
                        for pa, pb, sg in rows:
                            part = part + sg * prod[pa, pb]
                        for c in np.nonzero(w)[0]:
                            seg[c] += (psgn * w[c]) * part
        return SuperField(acc, x.parity + y.parity)

    def pair(self, x, y):
        """Trace of the product of two grid fields, by generator mask.

        Returns (values, scale); scale accumulates, per mask, the
        unsigned size of the grid contributions, so residuals of
        quantities that vanish by cancellation divide by its maximum.
        """
        mx, my, sgn, tgt = self._mask_tables(x, y)
        vals = {s: 0.0 for s in tgt}
        scale = {s: 0.0 for s in tgt}
        tw = self._trace_weights
        xs = np.stack([x.terms[s] for s in mx])
        ys = np.stack([y.terms[t] for t in my])
        xsplit = self._mask_split(mx, x.parity)
        ysplit = self._mask_split(my, y.parity)
        for bx, qx, by, qy, bt, qt, psgn, mt in self._gterms:
            if bt != self._trace_block or qt != 1:
                continue
            ia = xsplit[self._piece_parity[(bx, qx)]]
            ib = ysplit[self._piece_parity[(by, qy)]]
            if not ia or not ib:
                continue
            xp = self._gpiece_stack(xs[ia], bx, qx)
            yp = self._gpiece_stack(ys[ib], by, qy)
            na, nb = len(ia), len(ib)
            apos = {a: i for i, a in enumerate(ia)}
            bpos = {b: i for i, b in enumerate(ib)}
            mt2 = mt.sum(axis=2)
            v = np.zeros((na, nb), dtype=complex)
            u = np.zeros((na, nb))
            for m in range(mt2.shape[0]):
                # tr(X Y) contracts (p, q) against (q, p)
                xf = (xp[:, m] * tw[:, None, None]).reshape(na, -1)
                xa = np.abs(xf)
                for n in range(mt2.shape[1]):
                    if mt2[m, n] == 0:
                        continue
                    yf = np.swapaxes(yp[:, n], 2, 3).reshape(nb, -1)
                    v += (psgn * mt2[m, n]) * (xf @ yf.T)
                    u += abs(mt2[m, n]) * (xa @ np.abs(yf).T)
            for s, pairs in tgt.items():
                for a, b in pairs:
                    if a in apos and b in bpos:
                        vals[s] = vals[s] + sgn[a, b] * v[apos[a], bpos[b]]
                        scale[s] = scale[s] + u[apos[a], bpos[b]]
        return vals, scale


def _gs_max(vals):
    return max((abs(v) for v in vals.values()), default=0.0)


def _plain_pair(data, u, v):
    u2 = u.reshape(data.dim, -1)
    v2 = np.swapaxes(v, 1, 2).reshape(data.dim, -1)
    return np.sum(u2 * (data.pairing @ v2))


def bv_action(data, a):
    """Action S(a) = (1/2) <a, d a> + (1/6) <a a a>.

    For a SuperField of truncation coefficients the value is a dictionary
    over generator masks; for a plain (dim, k, k) array it is a complex
    number.  The cubic term is dropped when the data was built with
    cubic=False.
    """
    if isinstance(a, SuperField):
        ag = data.field_to_grid(a)
        dg = data.field_to_grid(data.apply_dbar(a))
        quad, _ = data.pair(ag, dg)
        out = {s: 0.5 * v for s, v in quad.items()}
        if data.cubic:
            cub, _ = data.pair(data.gmult(ag, ag), ag)
            for s, v in cub.items():
                out[s] = out.get(s, 0.0) + v / 6.0
        return out
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(data.dim, 1, 1)
    da = (data.dbar @ a.reshape(data.dim, -1)).reshape(a.shape)
    val = 0.5 * _plain_pair(data, a, da)
    if data.cubic:
        aa = data.g.product_apply(a, a)
        val = val + _plain_pair(data, aa, a) / 6.0
    return val


def action_expansion_oracle(data, indices, coeffs):
    """Independent evaluation of S on a = sum_I e_I x A_I by assembling
    the quadratic and cubic structure constants over the given support.

    indices is a list of basis positions, coeffs the matching (k, k)
    matrices.  Meant as a cross check of bv_action on small supports; the
    cubic constants are built from left multiplication operators of basis
    vectors, not from product_apply.
    """
    idx = list(indices)
    n = len(idx)
    quad = data.pairing @ data.dbar
    val = 0.0
    for i in range(n):
        for j in range(n):
            val += 0.5 * quad[idx[i], idx[j]] * np.trace(
                coeffs[i] @ coeffs[j])
    if data.cubic:
        basis_ops = {}
        for j in idx:
            e = np.zeros((data.dim, 1, 1), dtype=complex)
            e[j, 0, 0] = 1.0
            basis_ops[j] = data.g.left_mult_operator(e).reshape(
                data.dim, data.dim)
        for i in range(n):
            for j in range(n):
                prod = basis_ops[idx[i]][:, idx[j]]
                for l in range(n):
                    c = data.pairing[:, idx[l]] @ prod
                    if c == 0.0:
                        continue
                    val += c / 6.0 * np.trace(
                        coeffs[i] @ coeffs[j] @ coeffs[l])
    return val


def _variation(data, ag, dg, aag, vg, dvg=None):
    """Linear term of S(a + t v) in t, from grid fields of a, da, aa.

    When the direction exists only on the grid (no truncation
    coefficients, so no dv) the <a, d v> piece is traded for <d a, v>
    through the closedness of the trace, which holds for a odd.
    """
    p1, s1 = data.pair(vg, dg)
    if dvg is not None:
        p2, s2 = data.pair(ag, dvg)
    else:
        p2, s2 = data.pair(dg, vg)
    pieces = [(0.5, p1, s1), (0.5, p2, s2)]
    if data.cubic:
        av = data.gmult(ag, vg)
        p3, s3 = data.pair(vg, aag)
        p4, s4 = data.pair(av, ag)
        p5, s5 = data.pair(aag, vg)
        pieces += [(1 / 6.0, p3, s3), (1 / 6.0, p4, s4), (1 / 6.0, p5, s5)]
    vals, scale = {}, 0.0
    for w, p, s in pieces:
        for key, v_ in p.items():
            vals[key] = vals.get(key, 0.0) + w * v_
        scale = max(scale, max(s.values(), default=0.0))
    return vals, scale


def master_equation_residual(data, probes=20, seed=0, check_variation=2):
    """Residual of {S, S} = 0 at seeded random odd field points.

    At each point the curvature Q = d a + (1/2) a a is paired with itself
    on the grid; the reported residual is the largest signed coefficient
    against the unsigned size of the contributions.  For the first
    check_variation probes the linear variation of S is also contracted
    with Q directly, and the proportionality between the variation and
    <Q, .> is fitted on an independent random direction; both come back
    in the result for inspection.
    """
    rng = np.random.default_rng(seed)
    per_probe = []
    variation_vals = []
    fits = []
    for p in range(int(probes)):
        a = data.random_field(rng)
        ag = data.field_to_grid(a)
        dg = data.field_to_grid(data.apply_dbar(a))
        if data.cubic:
            aag = data.gmult(ag, ag)
            q = dg.plus(aag.scaled(0.5))
        else:
            aag = SuperField({}, 0)
            q = dg
        vals, scale = data.pair(q, q)
        top = max(scale.values(), default=0.0)
        per_probe.append(_gs_max(vals) / top if top > 0 else 0.0)
        if p < check_variation:
            dvals, dscale = _variation(data, ag, dg, aag, q)
            ref = max(dscale, top)
            variation_vals.append(_gs_max(dvals) / ref if ref > 0 else 0.0)
            v = data.random_field(rng)
            vg = data.field_to_grid(v)
            dvg = data.field_to_grid(data.apply_dbar(v))
            lvals, _ = _variation(data, ag, dg, aag, vg, dvg)
            rvals, _ = data.pair(q, vg)
            key = max(rvals, key=lambda s: abs(rvals[s]))
            kappa = lvals.get(key, 0.0) / rvals[key]
            mism = 0.0
            ref = max(_gs_max(lvals), 1e-300)
            for s in set(lvals) | set(rvals):
                mism = max(mism, abs(lvals.get(s, 0.0)
                                     - kappa * rvals.get(s, 0.0)) / ref)
            fits.append((kappa, mism))
    return {
        "residual": max(per_probe, default=0.0),
        "per_probe": per_probe,
        "variation_residual": max(variation_vals, default=0.0),
        "eom_fits": fits,
    }


def trace_cyclicity_residual(data, samples=20, seed=0):
    """Worst relative defect of <x y> = (-1)^{xy} <y x> over random plain
    matrix elements of fixed internal parities."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(int(samples)):
        px, py = rng.integers(0, 2, size=2)
        x = data.matrix_element(rng, px)
        y = data.matrix_element(rng, py)
        lhs = _plain_pair(data, x, y)
        rhs = _plain_pair(data, y, x)
        sgn = -1.0 if (px * py) % 2 else 1.0
        scale = data.pairing_norm * np.linalg.norm(x) * np.linalg.norm(y)
        worst = max(worst, abs(lhs - sgn * rhs) / scale)
    return worst
