"""Semidefinite relaxation of the OPF problem: build, solve, recover, and gap.

The rank-one lifting constraint is dropped and W >= 0 is kept, giving a convex
program whose optimum lower-bounds the OPF cost.  The problem is posed over
real symmetric blocks: the 2n x 2n real embedding of W, a 2x2 epigraph block
per quadratically-priced generator, a 3x3 arrow block per flow-limited branch
end, and a nonnegative slack for every one-sided limit.  A dense primal-dual
path-following interior-point method solves it; constraint matrices touching
the W block are kept in a low-rank pair form so the Schur complement assembles
from a handful of Gram products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .netmodel import AdmittanceModel, Case, build_admittance

__all__ = [
    "SdpProblem",
    "SdpSolution",
    "GapReport",
    "build_sdp",
    "solve_sdp",
    "rank_and_recovery",
    "optimality_gap",
    "to_sdpa",
]

GAP_TOL = 1e-7
FEAS_TOL = 1e-7
MAX_ITER = 200
RANK_THRESHOLD = 1e-5  # eigenvalue ratio for the numerical rank of W

OPTIMAL, INFEASIBLE, TROUBLE = "optimal", "infeasible", "numerical-trouble"


def _emb_vecs(u):
    """The two real embeddings of a complex vector: [Re;Im] and [-Im;Re]."""
    return np.concatenate([u.real, u.imag]), np.concatenate([-u.imag, u.real])


@dataclass
class _Constraint:
    b: float
    # W-block part: sum_r sigma_r (p_r q_r' + q_r p_r'); sigma folded into p.
    pairs: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    # small dense parts: block index -> matrix
    small: dict[int, np.ndarray] = field(default_factory=dict)
    # slack: (lp index, coefficient) or None
    slack: tuple[int, float] | None = None
    label: str = ""

    def add_hermitian(self, mat_pairs, scale):
        """Append scale * tr(M W) where M = sum (u v^H + v u^H) given as pairs.

        The real-embedding trace double-counts the complex one, hence the 1/2.
        """
        eff = 0.5 * scale
        for u, v in mat_pairs:
            u1, u2 = _emb_vecs(u)
            v1, v2 = _emb_vecs(v)
            self.pairs.append((eff * u1, v1))
            self.pairs.append((eff * u2, v2))


def _h_pairs(model, k):
    """H_k = (Y^H e_k e_k' + e_k e_k' Y)/2 as (u, v^H)-pair form."""
    w = np.conj(model.y_bus[k, :])  # Y^H e_k
    e = np.zeros(model.n, dtype=complex)
    e[k] = 0.5
    return [(w, e)]


def _htilde_pairs(model, k):
    w = np.conj(model.y_bus[k, :])
    e = np.zeros(model.n, dtype=complex)
    e[k] = 1.0
    return [(-0.5j * w, e)]  # (w/(2j)) e^H + e (w/(2j))^H


@dataclass
class SdpProblem:
    """Block SDP data in primal standard form min <C,X> s.t. A(X)=b, X >= 0."""

    n: int  # buses; W block is 2n x 2n
    w_dim: int
    small_dims: list[int]
    small_kinds: list[str]  # 'cost' | 'arrow', parallel to small_dims
    lp_dim: int
    cons: list[_Constraint]
    c_w: np.ndarray  # objective on the W block
    c_small: list[np.ndarray]
    const_offset: float  # added to <C,X> to get $/hr
    gen_buses: list[int]
    ref_index: int

    @property
    def m(self):
        return len(self.cons)


def build_sdp(case: Case, model: AdmittanceModel | None = None) -> SdpProblem:
    """Assemble the relaxation: linear trace rows for injection and voltage
    limits, Schur epigraph blocks for quadratic costs, arrow blocks for
    apparent-power limits (skipped when s_max = 0)."""
    if model is None:
        model = build_admittance(case)
    n = case.n
    base = case.base_mva
    cons: list[_Constraint] = []
    small_dims: list[int] = []
    small_kinds: list[str] = []
    c_small: list[np.ndarray] = []
    lp_dim = 0

    def new_slack():
        nonlocal lp_dim
        lp_dim += 1
        return lp_dim - 1

    def bounded_row(pairs, scale, lo, hi, label):
        """tr-form value in [lo, hi]; equality when the window is degenerate."""
        if hi - lo <= 1e-12:
            c = _Constraint(b=hi, label=f"{label}=")
            c.add_hermitian(pairs, scale)
            cons.append(c)
            return
        cu = _Constraint(b=hi, label=f"{label}<", slack=(new_slack(), 1.0))
        cu.add_hermitian(pairs, scale)
        cons.append(cu)
        cl = _Constraint(b=lo, label=f"{label}>", slack=(new_slack(), -1.0))
        cl.add_hermitian(pairs, scale)
        cons.append(cl)

    p_lo, p_hi = case.p_limits_pu()
    q_lo, q_hi = case.q_limits_pu()
    for k in range(n):
        bounded_row(_h_pairs(model, k), 1.0, p_lo[k], p_hi[k], f"P{k}")
        bounded_row(_htilde_pairs(model, k), 1.0, q_lo[k], q_hi[k], f"Q{k}")
        ek = np.zeros(n, dtype=complex)
        ek[k] = 1.0
        b = case.buses[k]
        bounded_row([(0.5 * ek, ek)], 1.0, b.v_min**2, b.v_max**2, f"V{k}")

    # objective: linear dispatch cost on W, epigraph variable per c2 > 0
    c_w_complex = np.zeros((n, n), dtype=complex)
    const = 0.0
    for gi, g in enumerate(case.gens):
        k = case.bus_index[g.bus]
        cost = case.costs[gi]
        pd = case.buses[k].p_load
        c1b = cost.c1 * base
        for u, v in _h_pairs(model, k):
            c_w_complex += c1b * (np.outer(u, np.conj(v)) + np.outer(v, np.conj(u)))
        const += cost.c0 + cost.c1 * pd
        if cost.c2 > 0.0:
            bidx = len(small_dims)
            small_dims.append(2)
            small_kinds.append("cost")
            c_obj = np.zeros((2, 2))
            c_obj[0, 0] = 1.0  # epigraph value t
            c_small.append(c_obj)
            fix = _Constraint(b=1.0, label=f"cost{gi}w")
            fix.small[bidx] = np.array([[0.0, 0.0], [0.0, 1.0]])
            cons.append(fix)
            # off-diagonal entry equals sqrt(c2') * P_G
            root = np.sqrt(cost.c2) * base
            link = _Constraint(b=root * pd / base, label=f"cost{gi}u")
            link.small[bidx] = np.array([[0.0, 0.5], [0.5, 0.0]])
            link.add_hermitian(_h_pairs(model, k), -root)
            cons.append(link)

    for bi, br in enumerate(case.branches):
        if br.s_max <= 0.0:
            continue
        smax = br.s_max / base
        l, m = model.branch_idx[bi]
        for tag, fmat in (("f", model.f_fwd(bi)), ("t", model.f_rev(bi))):
            bidx = len(small_dims)
            small_dims.append(3)
            small_kinds.append("arrow")
            c_small.append(np.zeros((3, 3)))
            for (r, c) in ((0, 0), (1, 1), (2, 2)):
                row = _Constraint(b=smax, label=f"S{bi}{tag}d{r}")
                e = np.zeros((3, 3)); e[r, c] = 1.0
                row.small[bidx] = e
                cons.append(row)
            z23 = _Constraint(b=0.0, label=f"S{bi}{tag}z")
            e = np.zeros((3, 3)); e[1, 2] = e[2, 1] = 0.5
            z23.small[bidx] = e
            cons.append(z23)
            # ties: entry (1,2) = P flow, (1,3) = Q flow, both halved trace forms
            re_m = fmat + fmat.conj().T
            im_m = 1j * (fmat.conj().T - fmat)
            for pos, herm in ((1, re_m), (2, im_m)):
                row = _Constraint(b=0.0, label=f"S{bi}{tag}e{pos}")
                e = np.zeros((3, 3)); e[0, pos] = e[pos, 0] = 0.5
                row.small[bidx] = e
                row.add_hermitian(_decompose_hermitian(herm), -0.5)
                cons.append(row)

    c_w = 0.5 * _hermitian_to_emb(c_w_complex)
    return SdpProblem(
        n=n,
        w_dim=2 * n,
        small_dims=small_dims,
        small_kinds=small_kinds,
        lp_dim=lp_dim,
        cons=cons,
        c_w=c_w,
        c_small=c_small,
        const_offset=const,
        gen_buses=[case.bus_index[g.bus] for g in case.gens],
        ref_index=case.ref_index,
    )


def _hermitian_to_emb(m):
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


def _decompose_hermitian(m):
    """Hermitian matrix -> list of (u, v) with M = sum u v^H + v u^H (rank-based)."""
    w, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    out = []
    for lam, vec in zip(w, vecs.T):
        if abs(lam) > 1e-14 * max(1.0, abs(w).max()):
            out.append((0.5 * lam * vec, vec))
    return out


@dataclass
class GapReport:
    local: float
    bound: float

    @property
    def gap_percent(self):
        return 100.0 * (self.local - self.bound) / self.bound


def optimality_gap(local: float, bound: float) -> GapReport:
    """Percent optimality gap, measured against the lower bound."""
    if bound <= 0.0:
        raise ValueError("lower bound must be positive")
    return GapReport(local=local, bound=bound)


@dataclass
class SdpSolution:
    w: np.ndarray  # Hermitian n x n, reassembled
    bound: float  # $/hr, from the dual objective
    eigenvalues: np.ndarray  # of W, descending
    rank: int
    recovered_v: np.ndarray | None
    status: str
    gap: float  # scaled primal-dual gap
    primal_infeas: float
    dual_infeas: float
    pobj: float
    dobj: float
    iterations: int
    x_blocks: list | None = None


def rank_and_recovery(sol: SdpSolution):
    """Numerical rank of W and, when rank one, the voltage vector."""
    return sol.rank, sol.recovered_v


def _rank_of(eigs):
    lam_max = eigs[0] if len(eigs) else 0.0
    if lam_max <= 0.0:
        return 0
    return int(np.sum(eigs / lam_max > RANK_THRESHOLD))


# --------------------------------------------------------------------------
# interior-point solver


class _BlockOps:
    """Vectorized constraint algebra over (W block, small blocks, LP cone)."""

    def __init__(self, prob: SdpProblem):
        self.prob = prob
        m = prob.m
        self.m = m
        # pad W-block pair terms to a fixed count per constraint
        max_r = max((len(c.pairs) for c in prob.cons), default=0)
        self.max_r = max(max_r, 1)
        d = prob.w_dim
        t_total = m * self.max_r
        self.P = np.zeros((d, t_total))
        self.Q = np.zeros((d, t_total))
        for i, c in enumerate(prob.cons):
            for r, (p, q) in enumerate(c.pairs):
                self.P[:, i * self.max_r + r] = p
                self.Q[:, i * self.max_r + r] = q
        self.small_touch: list[list[tuple[int, np.ndarray]]] = [
            [] for _ in prob.small_dims
        ]
        for i, c in enumerate(prob.cons):
            for bidx, mat in c.small.items():
                self.small_touch[bidx].append((i, mat))
        self.slack_idx = np.full(m, -1, dtype=int)
        self.slack_coef = np.zeros(m)
        for i, c in enumerate(prob.cons):
            if c.slack is not None:
                self.slack_idx[i] = c.slack[0]
                self.slack_coef[i] = c.slack[1]
        self.has_slack = self.slack_idx >= 0
        self.b = np.array([c.b for c in prob.cons])

        # row scaling to unit Frobenius norm
        norms = np.sqrt(np.maximum(self._row_norms_sq(), 1e-16))
        self.row_scale = 1.0 / norms
        self.P *= self.row_scale[np.repeat(np.arange(m), self.max_r)]
        for lst in self.small_touch:
            for j, (i, mat) in enumerate(lst):
                lst[j] = (i, mat * self.row_scale[i])
        self.slack_coef *= self.row_scale
        self.b = self.b * self.row_scale

    def _row_norms_sq(self):
        m = self.m
        out = np.zeros(m)
        for i, c in enumerate(self.prob.cons):
            acc = 0.0
            for a in range(len(c.pairs)):
                pa, qa = c.pairs[a]
                for bb in range(len(c.pairs)):
                    pb, qb = c.pairs[bb]
                    acc += 2.0 * ((qa @ pb) * (qb @ pa) + (qa @ qb) * (pa @ pb))
            for mat in c.small.values():
                acc += float(np.sum(mat * mat))
            if c.slack is not None:
                acc += c.slack[1] ** 2
            out[i] = acc
        return out

    # -- linear maps

    def apply_a(self, xw, xs, xl):
        """A(X) for symmetric xw, list xs, vector xl."""
        dots = 2.0 * np.einsum("it,it->t", self.Q, xw @ self.P)
        out = dots.reshape(self.m, self.max_r).sum(axis=1)
        for bidx, lst in enumerate(self.small_touch):
            xb = xs[bidx]
            for i, mat in lst:
                out[i] += float(np.sum(mat * xb))
        if self.prob.lp_dim:
            sel = self.has_slack
            out[sel] += self.slack_coef[sel] * xl[self.slack_idx[sel]]
        return out

    def apply_at(self, y):
        """A^T(y) as (W matrix, small matrices, lp vector)."""
        yt = np.repeat(y, self.max_r)
        pw = self.P * yt
        mat = pw @ self.Q.T
        atw = mat + mat.T
        ats = [np.zeros((d, d)) for d in self.prob.small_dims]
        for bidx, lst in enumerate(self.small_touch):
            for i, m_ in lst:
                ats[bidx] += y[i] * m_
        atl = np.zeros(self.prob.lp_dim)
        if self.prob.lp_dim:
            sel = self.has_slack
            atl[self.slack_idx[sel]] = y[sel] * self.slack_coef[sel]
        return atw, ats, atl

    def schur(self, xw, zw, xs, zs, xl, sl):
        """M with M_ij = A_i * d(A^T y -> X direction); HKM left-hand side."""
        both = np.hstack([self.P, self.Q])
        gx = both.T @ (xw @ both)
        gz = both.T @ (zw @ both)
        t = self.P.shape[1]
        xpp, xpq = gx[:t, :t], gx[:t, t:]
        xqp, xqq = gx[t:, :t], gx[t:, t:]
        zpp, zpq = gz[:t, :t], gz[:t, t:]
        zqp, zqq = gz[t:, :t], gz[t:, t:]
        e = xqp * zqp.T + xqq * zpp.T + xpp * zqq.T + xpq * zpq.T
        e = e + (zqp * xqp.T + zqq * xpp.T + zpp * xqq.T + zpq * xpq.T)
        # fold term pairs into constraint pairs
        e4 = e.reshape(self.m, self.max_r, self.m, self.max_r)
        mmat = e4.sum(axis=(1, 3))
        for bidx, lst in enumerate(self.small_touch):
            xb, zb = xs[bidx], zs[bidx]
            for i, mi in lst:
                for j, mj in lst:
                    mmat[i, j] += float(np.sum(mi * (xb @ mj @ zb))) + float(
                        np.sum(mi * (zb @ mj @ xb))
                    )
        if self.prob.lp_dim:
            sel = self.has_slack
            idx = self.slack_idx[sel]
            diag = self.slack_coef[sel] ** 2 * xl[idx] / sl[idx]
            mmat[sel, sel] += 2.0 * diag
        return 0.5 * mmat


def _chol_min_step(x, dx):
    """Largest alpha with x + alpha dx >= 0 (dense block)."""
    try:
        l = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        l = np.linalg.cholesky(x + 1e-12 * np.trace(x) / len(x) * np.eye(len(x)))
    li = np.linalg.inv(l)
    h = li @ dx @ li.T
    lam = np.linalg.eigvalsh(0.5 * (h + h.T))[0]
    if lam >= 0.0:
        return np.inf
    return 1.0 / (-lam)


def solve_sdp(prob: SdpProblem, max_iter: int = MAX_ITER, verbose: bool = False) -> SdpSolution:
    """Primal-dual path-following solve of the block SDP.

    Runs a Mehrotra predictor-corrector iteration to relative gap 1e-7;
    detects primal infeasibility through a Farkas-type dual ray.
    """
    ops = _BlockOps(prob)
    m = prob.m
    d = prob.w_dim
    dims = [d] + list(prob.small_dims)
    nu = sum(dims) + prob.lp_dim

    c_scale = max(1.0, float(np.linalg.norm(prob.c_w)))
    cw = prob.c_w / c_scale
    cs = [c / c_scale for c in prob.c_small]

    bnorm = float(np.linalg.norm(ops.b))
    eta_p = max(10.0, 2.0 * float(np.max(np.abs(ops.b))) if m else 1.0)
    eta_d = max(10.0, float(np.linalg.norm(cw)))

    xw = eta_p * np.eye(d)
    xs = [eta_p * np.eye(k) for k in prob.small_dims]
    xl = eta_p * np.ones(prob.lp_dim)
    sw = eta_d * np.eye(d)
    ss = [eta_d * np.eye(k) for k in prob.small_dims]
    sl = eta_d * np.ones(prob.lp_dim)
    y = np.zeros(m)

    def inner(aw, a_s, al, bw, bs, bl):
        tot = float(np.sum(aw * bw)) + float(al @ bl)
        for u, v in zip(a_s, bs):
            tot += float(np.sum(u * v))
        return tot

    best = None
    status = TROUBLE
    it = 0
    for it in range(1, max_iter + 1):
        rp = ops.b - ops.apply_a(xw, xs, xl)
        atw, ats, atl = ops.apply_at(y)
        rdw = cw - sw - atw
        rds = [c - s - a for c, s, a in zip(cs, ss, ats)]
        rdl = -sl - atl
        mu = inner(xw, xs, xl, sw, ss, sl) / nu

        pobj = inner(cw, cs, np.zeros(prob.lp_dim), xw, xs, xl)
        dobj = float(ops.b @ y)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = float(np.linalg.norm(rp)) / (1.0 + bnorm)
        dinf = np.sqrt(
            float(np.sum(rdw**2))
            + sum(float(np.sum(r**2)) for r in rds)
            + float(rdl @ rdl)
        ) / (1.0 + float(np.linalg.norm(cw)))

        score = max(gap, pinf, dinf)
        if best is None or score < best[0]:
            best = (score, pobj, dobj, gap, pinf, dinf, xw.copy(), [b.copy() for b in xs], xl.copy(), it)
        if verbose:
            print(f"  it {it:3d} mu {mu:9.2e} gap {gap:9.2e} pinf {pinf:9.2e} dinf {dinf:9.2e}")
        if gap < GAP_TOL and pinf < FEAS_TOL and dinf < FEAS_TOL:
            status = OPTIMAL
            break

        # Farkas-style primal-infeasibility ray: b'y > 0 with A^T y <= 0
        ynorm = float(np.linalg.norm(y))
        if ynorm > 1.0:
            yh = y / ynorm
            hw, hs, hl = ops.apply_at(yh)
            lam_max = np.linalg.eigvalsh(0.5 * (hw + hw.T))[-1] if d else 0.0
            for b in hs:
                lam_max = max(lam_max, np.linalg.eigvalsh(0.5 * (b + b.T))[-1])
            if prob.lp_dim and len(hl):
                lam_max = max(lam_max, float(np.max(hl)))
            if float(ops.b @ yh) > 1e-6 and lam_max < 1e-7:
                status = INFEASIBLE
                break
        if not np.isfinite(mu) or mu > 1e12 * (eta_p * eta_d) or dinf > 1e12:
            break  # hopeless divergence; report the best iterate

        sw_inv = np.linalg.inv(sw)
        ss_inv = [np.linalg.inv(s) for s in ss]
        sw_inv = 0.5 * (sw_inv + sw_inv.T)
        mmat = ops.schur(xw, sw_inv, xs, ss_inv, xl, sl)

        def solve_m(rhs):
            for jit in (0.0, 1e-12, 1e-9, 1e-6):
                try:
                    l = np.linalg.cholesky(mmat + jit * np.diag(np.diag(mmat)) if jit else mmat)
                    t1 = np.linalg.solve(l, rhs)
                    return np.linalg.solve(l.T, t1)
                except np.linalg.LinAlgError:
                    continue
            return np.linalg.lstsq(mmat, rhs, rcond=None)[0]

        def direction(sigma_mu, corr_w, corr_s, corr_l):
            # rhs_i = 1/2 A(X Rd S^-1 + S^-1 Rd X) - sigma_mu A(S^-1) + A(corr) + b
            tw = xw @ rdw @ sw_inv
            hw = 0.5 * (tw + tw.T) - sigma_mu * sw_inv + corr_w
            hs, hl_parts = [], None
            for xb, rb, sbi, cb in zip(xs, rds, ss_inv, corr_s):
                tb = xb @ rb @ sbi
                hs.append(0.5 * (tb + tb.T) - sigma_mu * sbi + cb)
            hl_parts = (xl * rdl / sl) - sigma_mu / sl + corr_l if prob.lp_dim else np.zeros(0)
            rhs = ops.apply_a(hw, hs, hl_parts) + ops.b
            dy = solve_m(rhs)
            dsw_, dss_, dsl_ = ops.apply_at(dy)
            dsw = rdw - dsw_
            dss = [r - a for r, a in zip(rds, dss_)]
            dsl = rdl - dsl_
            tw2 = xw @ dsw @ sw_inv
            dxw = sigma_mu * sw_inv - xw - 0.5 * (tw2 + tw2.T) - corr_w
            dxs = []
            for xb, db, sbi, cb in zip(xs, dss, ss_inv, corr_s):
                tb = xb @ db @ sbi
                dxs.append(sigma_mu * sbi - xb - 0.5 * (tb + tb.T) - cb)
            dxl = sigma_mu / sl - xl - xl * dsl / sl - corr_l if prob.lp_dim else np.zeros(0)
            return dy, dxw, dxs, dxl, dsw, dss, dsl

        zero_s = [np.zeros((k, k)) for k in prob.small_dims]
        zero_l = np.zeros(prob.lp_dim)
        aff = direction(0.0, np.zeros((d, d)), zero_s, zero_l)
        dy_a, dxw_a, dxs_a, dxl_a, dsw_a, dss_a, dsl_a = aff

        def max_steps(dxw_, dxs_, dxl_, dsw_, dss_, dsl_):
            ap = _chol_min_step(xw, dxw_)
            ad = _chol_min_step(sw, dsw_)
            for xb, dxb, sb, dsb in zip(xs, dxs_, ss, dss_):
                ap = min(ap, _chol_min_step(xb, dxb))
                ad = min(ad, _chol_min_step(sb, dsb))
            if prob.lp_dim:
                negp = dxl_ < 0
                if negp.any():
                    ap = min(ap, float(np.min(-xl[negp] / dxl_[negp])))
                negd = dsl_ < 0
                if negd.any():
                    ad = min(ad, float(np.min(-sl[negd] / dsl_[negd])))
            return min(1.0, 0.98 * ap), min(1.0, 0.98 * ad)

        ap_a, ad_a = max_steps(dxw_a, dxs_a, dxl_a, dsw_a, dss_a, dsl_a)
        mu_aff = inner(
            xw + ap_a * dxw_a,
            [xb + ap_a * db for xb, db in zip(xs, dxs_a)],
            xl + ap_a * dxl_a if prob.lp_dim else xl,
            sw + ad_a * dsw_a,
            [sb + ad_a * db for sb, db in zip(ss, dss_a)],
            sl + ad_a * dsl_a if prob.lp_dim else sl,
        ) / nu
        sigma = min(1.0, max((max(mu_aff, 0.0) / mu) ** 3, 1e-6))

        tcw = dxw_a @ dsw_a @ sw_inv
        corr_w = 0.5 * (tcw + tcw.T)
        corr_s = []
        for dxb, dsb, sbi in zip(dxs_a, dss_a, ss_inv):
            tb = dxb @ dsb @ sbi
            corr_s.append(0.5 * (tb + tb.T))
        corr_l = dxl_a * dsl_a / sl if prob.lp_dim else zero_l

        dy, dxw, dxs, dxl, dsw, dss, dsl = direction(sigma * mu, corr_w, corr_s, corr_l)
        ap, ad = max_steps(dxw, dxs, dxl, dsw, dss, dsl)
        if max(ap, ad) < 1e-12:
            break
        xw = xw + ap * dxw
        xs = [xb + ap * db for xb, db in zip(xs, dxs)]
        xl = xl + ap * dxl if prob.lp_dim else xl
        y = y + ad * dy
        sw = sw + ad * dsw
        ss = [sb + ad * db for sb, db in zip(ss, dss)]
        sl = sl + ad * dsl if prob.lp_dim else sl

    if status == INFEASIBLE:
        return SdpSolution(
            w=np.zeros((prob.n, prob.n), dtype=complex),
            bound=float("inf"),
            eigenvalues=np.zeros(prob.n),
            rank=0,
            recovered_v=None,
            status=INFEASIBLE,
            gap=float("nan"),
            primal_infeas=float("nan"),
            dual_infeas=float("nan"),
            pobj=float("nan"),
            dobj=float("nan"),
            iterations=it,
        )

    _, pobj, dobj, gap, pinf, dinf, bxw, bxs, bxl, bit = best
    n = prob.n
    re = 0.5 * (bxw[:n, :n] + bxw[n:, n:])
    im = 0.5 * (bxw[n:, :n] - bxw[:n, n:])
    w = re + 1j * im
    w = 0.5 * (w + w.conj().T)
    eigs, vecs = np.linalg.eigh(w)
    eigs, vecs = eigs[::-1], vecs[:, ::-1]
    rank = _rank_of(eigs)
    recovered = None
    if rank == 1:
        v = np.sqrt(max(eigs[0], 0.0)) * vecs[:, 0]
        ref = v[prob.ref_index]
        if abs(ref) > 1e-9:
            v = v * np.exp(-1j * np.angle(ref))
        recovered = v
    bound = dobj * c_scale + prob.const_offset
    return SdpSolution(
        w=w,
        bound=bound,
        eigenvalues=eigs,
        rank=rank,
        recovered_v=recovered,
        status=status if status == OPTIMAL else TROUBLE,
        gap=gap,
        primal_infeas=pinf,
        dual_infeas=dinf,
        pobj=pobj * c_scale + prob.const_offset,
        dobj=bound,
        iterations=it,
        x_blocks=[bxw, bxs, bxl],
    )


def to_sdpa(prob: SdpProblem) -> str:
    """Emit the problem in the sparse SDPA (.dat-s) text format.

    Intended for desk-scale cross-checks against external conic solvers; the
    LP slacks become a final diagonal block.
    """
    blocks = [prob.w_dim] + list(prob.small_dims)
    if prob.lp_dim:
        blocks.append(-prob.lp_dim)
    lines = [f"{prob.m} = mDIM", f"{len(blocks)} = nBLOCK"]
    lines.append(" ".join(str(b) for b in blocks) + " = bLOCKsTRUCT")
    lines.append(" ".join(f"{float(c.b):.17g}" for c in prob.cons))

    def emit(mat_idx, block_no, mat):
        rows = []
        dsize = mat.shape[0]
        for r in range(dsize):
            for c in range(r, dsize):
                if mat[r, c] != 0.0:
                    rows.append(f"{mat_idx} {block_no} {r + 1} {c + 1} {float(mat[r, c]):.17g}")
        return rows

    # objective: SDPA minimizes tr(F0 X) convention with sign flip on F0
    f0w = np.zeros((prob.w_dim, prob.w_dim))
    f0w += prob.c_w
    lines.extend(emit(0, 1, -f0w))
    for bidx, c in enumerate(prob.c_small):
        lines.extend(emit(0, 2 + bidx, -c))
    for i, con in enumerate(prob.cons):
        mat = np.zeros((prob.w_dim, prob.w_dim))
        for p, q in con.pairs:
            mat += np.outer(p, q) + np.outer(q, p)
        lines.extend(emit(i + 1, 1, mat))
        for bidx, small in con.small.items():
            lines.extend(emit(i + 1, 2 + bidx, small))
        if con.slack is not None and prob.lp_dim:
            li = con.slack[0]
            lines.append(f"{i + 1} {len(blocks)} {li + 1} {li + 1} {float(con.slack[1]):.17g}")
    return "\n".join(lines) + "\n"
