"""Local OPF solution by a primal-dual interior-point method, plus multistart search.

The solver works in polar voltage coordinates (magnitudes and angles, slack
angle eliminated), so the voltage-magnitude band is a box.  Power-balance
rows at buses with zero-width generation limits are equalities; everything
else is an inequality handled through slacks and a log barrier with a
Mehrotra-style adaptive barrier update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netmodel import (
    AdmittanceModel,
    Case,
    ConstraintReport,
    build_admittance,
    check_feasibility,
    evaluate_point,
)
from . import pflow

__all__ = [
    "OpfPoint",
    "KktResiduals",
    "LocalOptimaSet",
    "solve_local",
    "kkt_residual",
    "multistart",
]

KKT_TOL = 1e-6
MAX_ITER = 200
FRACTION_TO_BOUNDARY = 0.995
DEDUPE_RADIUS = 1e-4
VM_FLOOR = 1e-4  # keeps polar derivatives finite on wild iterates

LOCAL_OPTIMUM, STATIONARY_ONLY, FAILED = "local-optimum", "stationary-only", "failed"


@dataclass
class KktResiduals:
    stationarity: float
    primal: float
    complementarity: float

    def passed(self, tol=KKT_TOL):
        return max(self.stationarity, self.primal, self.complementarity) < tol


@dataclass
class OpfPoint:
    v: np.ndarray  # complex p.u.
    p_gen: np.ndarray  # MW, case.gens order
    q_gen: np.ndarray  # MVAr
    objective: float  # $/hr
    status: str
    binding: ConstraintReport | None
    kkt: KktResiduals | None
    multipliers: dict | None = None
    iterations: int = 0
    reason: str = ""


@dataclass
class LocalOptimaSet:
    points: list[OpfPoint]  # distinct local optima, best objective first
    basin_counts: list[int]
    n_starts: int
    n_failed: int
    n_stationary: int

    @property
    def best(self):
        return self.points[0] if self.points else None

    @property
    def worst(self):
        return self.points[-1] if self.points else None


# --------------------------------------------------------------------------
# polar-coordinate calculus


def _injection_jacobians(y, v, vm):
    """dS/dVm and dS/dVa for all buses; standard polar formulas."""
    ibus = y @ v
    vnorm = v / vm
    ds_dvm = np.diag(vnorm * np.conj(ibus)) + v[:, None] * np.conj(y) * np.conj(vnorm)[None, :]
    ds_dva = 1j * (np.diag(v * np.conj(ibus)) - v[:, None] * np.conj(y) * np.conj(v)[None, :])
    return ds_dvm, ds_dva


def _weighted_hessian(coeff, vm, va):
    """Hessian blocks of Re sum_{km} coeff_km v_k v_m e^{j(va_k - va_m)}.

    Returns (Hvv, Hva, Haa), each (n, n) real, ordered (Vm, Va).
    """
    u = vm * np.exp(1j * va)
    t = coeff * np.outer(u, np.conj(u))
    row = t.sum(axis=1)
    col = t.sum(axis=0)
    sym = t + t.T
    hvv = sym / np.outer(vm, vm)
    haa = sym - np.diag(row + col)
    hva = 1j * (t.T - t) / vm[:, None]
    np.fill_diagonal(hva, 1j * (row - col) / vm)
    return hvv.real, hva.real, haa.real


@dataclass
class _Row:
    kind: str  # 'P' | 'Q' | 'V' | 'F'
    bus: int  # positional bus index ('P','Q','V'); branch index for 'F'
    sign: float  # +1 upper (value - bound <= 0), -1 lower; 0 for equality
    bound: float
    forward: bool = True  # which branch end for 'F'


class _OpfNlp:
    """Nonlinear program for one case: objective, constraints, derivatives.

    Variables are x = [Vm (n); Va at non-slack buses (n-1)], per unit/radians.
    """

    def __init__(self, case: Case, model: AdmittanceModel | None = None):
        self.case = case
        self.model = model if model is not None else build_admittance(case)
        self.n = case.n
        self.ref = case.ref_index
        self.free_angles = np.array([k for k in range(self.n) if k != self.ref], dtype=int)
        self.nx = 2 * self.n - 1
        base = case.base_mva

        self.gen_bus = np.array([case.bus_index[g.bus] for g in case.gens])
        self.c2 = np.array([c.c2 for c in case.costs]) * base * base
        self.c1 = np.array([c.c1 for c in case.costs]) * base
        self.c0 = np.array([c.c0 for c in case.costs])
        self.pd_pu = np.array([case.buses[k].p_load for k in self.gen_bus]) / base

        p_lo, p_hi = case.p_limits_pu()
        q_lo, q_hi = case.q_limits_pu()
        eq_rows: list[_Row] = []
        iq_rows: list[_Row] = []
        for k in range(self.n):
            for kind, lo, hi in (("P", p_lo[k], p_hi[k]), ("Q", q_lo[k], q_hi[k])):
                if hi - lo <= 1e-12:
                    eq_rows.append(_Row(kind, k, 0.0, hi))
                else:
                    iq_rows.append(_Row(kind, k, +1.0, hi))
                    iq_rows.append(_Row(kind, k, -1.0, lo))
            b = case.buses[k]
            iq_rows.append(_Row("V", k, +1.0, b.v_max))
            iq_rows.append(_Row("V", k, -1.0, b.v_min))
        self.limited = [
            (bi, br.s_max / base) for bi, br in enumerate(case.branches) if br.s_max > 0.0
        ]
        for bi, smax in self.limited:
            iq_rows.append(_Row("F", bi, +1.0, smax * smax, forward=True))
            iq_rows.append(_Row("F", bi, +1.0, smax * smax, forward=False))
        self.eq_rows = eq_rows
        self.iq_rows = iq_rows
        self.neq = len(eq_rows)
        self.niq = len(iq_rows)

    # -- packing helpers

    def pack(self, vm, va):
        return np.concatenate([vm, va[self.free_angles]])

    def unpack(self, x):
        vm = np.maximum(x[: self.n], VM_FLOOR)
        va = np.zeros(self.n)
        va[self.free_angles] = x[self.n :]
        return vm, va

    def voltages(self, x):
        vm, va = self.unpack(x)
        return vm * np.exp(1j * va)

    # -- function evaluations

    def _physics(self, x):
        vm, va = self.unpack(x)
        v = vm * np.exp(1j * va)
        s = self.model.injections(v)
        s_fwd, s_rev = self.model.branch_flows(v)
        return vm, va, v, s, s_fwd, s_rev

    def objective(self, s):
        pg = s.real[self.gen_bus] + self.pd_pu
        return float(np.sum((self.c2 * pg + self.c1) * pg + self.c0))

    def eval_all(self, x):
        """Everything the IPM needs at one point, except the Hessian."""
        vm, va, v, s, s_fwd, s_rev = self._physics(x)
        f = self.objective(s)

        ds_dvm, ds_dva = _injection_jacobians(self.model.y_bus, v, vm)

        def inj_grad_rows(kind, buses):
            rows_m = ds_dvm[buses]
            rows_a = ds_dva[buses][:, self.free_angles]
            comp = np.hstack([rows_m, rows_a])
            return comp.real if kind == "P" else comp.imag

        pg = s.real[self.gen_bus] + self.pd_pu
        w = 2.0 * self.c2 * pg + self.c1
        grad_p_gen = inj_grad_rows("P", self.gen_bus)
        grad_f = w @ grad_p_gen

        g = np.empty(self.neq)
        jg = np.empty((self.neq, self.nx))
        for i, row in enumerate(self.eq_rows):
            val = s.real[row.bus] if row.kind == "P" else s.imag[row.bus]
            g[i] = val - row.bound
            jg[i] = inj_grad_rows(row.kind, [row.bus])[0]

        h = np.empty(self.niq)
        jh = np.zeros((self.niq, self.nx))
        flow_grads = {}
        for bi, _ in self.limited:
            flow_grads[bi] = self._flow_grads(bi, v, vm)
        for i, row in enumerate(self.iq_rows):
            if row.kind == "V":
                val, grad = vm[row.bus], None
                h[i] = row.sign * (val - row.bound)
                jh[i, row.bus] = row.sign
            elif row.kind == "F":
                sf = s_fwd[row.bus] if row.forward else s_rev[row.bus]
                gp, gq = flow_grads[row.bus][0 if row.forward else 1]
                h[i] = (sf.real**2 + sf.imag**2) - row.bound
                jh[i] = 2.0 * sf.real * gp + 2.0 * sf.imag * gq
            else:
                val = s.real[row.bus] if row.kind == "P" else s.imag[row.bus]
                h[i] = row.sign * (val - row.bound)
                jh[i] = row.sign * inj_grad_rows(row.kind, [row.bus])[0]
        return dict(vm=vm, va=va, v=v, s=s, s_fwd=s_fwd, s_rev=s_rev, f=f, grad_f=grad_f,
                    g=g, jg=jg, h=h, jh=jh, pg=pg, grad_p_gen=grad_p_gen)

    def _flow_grads(self, bi, v, vm):
        """((gradP_f, gradQ_f), (gradP_r, gradQ_r)) for branch bi, rows over x."""
        l, m = self.model.branch_idx[bi]
        y_ff, y_ft, y_tf, y_tt = self.model.branch_adm[bi]
        out = []
        for (a, bb), (yaa, yab) in (((l, m), (y_ff, y_ft)), ((m, l), (y_tt, y_tf))):
            i_end = yaa * v[a] + yab * v[bb]
            dvm = np.zeros(self.n, dtype=complex)
            dva = np.zeros(self.n, dtype=complex)
            dvm[a] = (v[a] / vm[a]) * np.conj(i_end) + v[a] * np.conj(yaa) * np.conj(v[a]) / vm[a]
            dvm[bb] = v[a] * np.conj(yab) * np.conj(v[bb]) / vm[bb]
            dva[a] = 1j * v[a] * np.conj(i_end) - 1j * v[a] * np.conj(yaa * v[a])
            dva[bb] = -1j * v[a] * np.conj(yab * v[bb])
            comp = np.concatenate([dvm, dva[self.free_angles]])
            out.append((comp.real, comp.imag))
        return out

    def lagrangian_hessian(self, ev, lam, mu, sigma_obj=1.0):
        """Hessian of sigma_obj*f + lam'g + mu'h over x."""
        vm, va, v = ev["vm"], ev["va"], ev["v"]
        ybar = np.conj(self.model.y_bus)
        lam_c = np.zeros(self.n, dtype=complex)

        pg = ev["pg"]
        w_obj = sigma_obj * (2.0 * self.c2 * pg + self.c1)
        lam_c[self.gen_bus] += w_obj

        for i, row in enumerate(self.eq_rows):
            lam_c[row.bus] += lam[i] if row.kind == "P" else -1j * lam[i]
        coeff = (lam_c[:, None]) * ybar

        rank1 = np.zeros((self.nx, self.nx))
        gpr = ev["grad_p_gen"]
        rank1 += (gpr.T * (2.0 * sigma_obj * self.c2)) @ gpr

        flow_cache = {}
        for i, row in enumerate(self.iq_rows):
            if mu[i] == 0.0 or row.kind == "V":
                continue
            if row.kind == "F":
                bi = row.bus
                if bi not in flow_cache:
                    flow_cache[bi] = self._flow_grads(bi, v, vm)
                sf = ev["s_fwd"][bi] if row.forward else ev["s_rev"][bi]
                gp, gq = flow_cache[bi][0 if row.forward else 1]
                rank1 += 2.0 * mu[i] * (np.outer(gp, gp) + np.outer(gq, gq))
                # second-order flow term folds into the weighted-coefficient sum
                l, m = self.model.branch_idx[bi]
                y_ff, y_ft, y_tf, y_tt = self.model.branch_adm[bi]
                cmat = np.zeros((self.n, self.n), dtype=complex)
                if row.forward:
                    cmat[l, l] = np.conj(y_ff)
                    cmat[l, m] = np.conj(y_ft)
                else:
                    cmat[m, m] = np.conj(y_tt)
                    cmat[m, l] = np.conj(y_tf)
                wgt = 2.0 * mu[i] * (sf.real - 1j * sf.imag)
                coeff = coeff + wgt * cmat
            else:
                wc = mu[i] * row.sign
                lam_c_add = wc if row.kind == "P" else -1j * wc
                coeff[row.bus] += lam_c_add * ybar[row.bus]

        hvv, hva, haa = _weighted_hessian(coeff, vm, va)
        hx = np.zeros((self.nx, self.nx))
        hx[: self.n, : self.n] = hvv
        fa = self.free_angles
        hx[: self.n, self.n :] = hva[:, fa]
        hx[self.n :, : self.n] = hva[:, fa].T
        hx[self.n :, self.n :] = haa[np.ix_(fa, fa)]
        return hx + rank1

    def kkt(self, ev, lam, mu, z):
        lx = ev["grad_f"] + ev["jg"].T @ lam + ev["jh"].T @ mu
        x_scale = 1.0 + max(np.max(np.abs(ev["vm"])), np.max(np.abs(z)) if len(z) else 0.0)
        mult_scale = 1.0 + max(np.max(np.abs(lam)) if len(lam) else 0.0, np.max(np.abs(mu)) if len(mu) else 0.0)
        primal = max(
            np.max(np.abs(ev["g"])) if self.neq else 0.0,
            np.max(ev["h"]) if self.niq else 0.0,
        )
        comp = float(z @ mu) if self.niq else 0.0
        return KktResiduals(
            stationarity=float(np.max(np.abs(lx))) / mult_scale,
            primal=float(primal) / x_scale,
            complementarity=comp / x_scale,
        )


def _max_step(v, dv, tau=FRACTION_TO_BOUNDARY):
    neg = dv < 0.0
    if not neg.any():
        return 1.0
    return min(1.0, tau * float(np.min(-v[neg] / dv[neg])))


def _saddle_lu_solver(m_mat, jg):
    """Factor [[M, Jg'], [Jg, 0]] once; returns a two-rhs solve callable."""
    nx = m_mat.shape[0]
    neq = jg.shape[0]
    kkt = np.zeros((nx + neq, nx + neq))
    kkt[:nx, :nx] = m_mat
    if neq:
        kkt[:nx, nx:] = jg.T
        kkt[nx:, :nx] = jg

    def solve(r1, r2):
        try:
            sol = np.linalg.solve(kkt, np.concatenate([r1, r2]))
        except np.linalg.LinAlgError:
            return None
        return sol[:nx], sol[nx:]

    return solve


def _saddle_pd_solver(m_mat, jg):
    """Block-elimination solver with the condensed block forced positive definite."""
    nx = m_mat.shape[0]
    neq = jg.shape[0]
    scale = max(1.0, float(np.mean(np.abs(np.diag(m_mat)))))
    chol = None
    for delta in (0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2):
        try:
            chol = np.linalg.cholesky(m_mat + delta * scale * np.eye(nx))
            break
        except np.linalg.LinAlgError:
            continue
    if chol is None:
        return None

    def msolve(b):
        return np.linalg.solve(chol.T, np.linalg.solve(chol, b))

    if neq:
        schur = jg @ msolve(jg.T)
        schur += 1e-12 * max(1.0, float(np.mean(np.abs(np.diag(schur))))) * np.eye(neq)

    def solve(r1, r2):
        try:
            if neq:
                dlam = np.linalg.solve(schur, jg @ msolve(r1) - r2)
                dx = msolve(r1 - jg.T @ dlam)
            else:
                dlam = np.zeros(0)
                dx = msolve(r1)
        except np.linalg.LinAlgError:
            return None
        return dx, dlam

    return solve


def _flat_start(case: Case):
    vm = np.array([min(max(1.0, b.v_min), b.v_max) for b in case.buses])
    return vm, np.zeros(case.n)


def solve_local(case: Case, init=None, model: AdmittanceModel | None = None,
                tol: float = KKT_TOL, max_iter: int = MAX_ITER) -> OpfPoint:
    """Solve the OPF locally from ``init`` (None = flat start).

    ``init`` may be an OpfPoint, a complex voltage vector, or a (vm, va) pair.
    Returns an OpfPoint whose status reports local optimality, a stationary
    point with negative curvature, or failure.
    """
    nlp = _OpfNlp(case, model)
    if init is None:
        vm, va = _flat_start(case)
    elif isinstance(init, OpfPoint):
        vm, va = np.abs(init.v), np.angle(init.v)
    elif isinstance(init, tuple):
        vm, va = np.asarray(init[0], dtype=float), np.asarray(init[1], dtype=float)
    else:
        vv = np.asarray(init, dtype=complex)
        vm, va = np.abs(vv), np.angle(vv)
    va = va - va[nlp.ref]  # slack angle reference
    x = nlp.pack(np.maximum(vm, VM_FLOOR), va)

    lam = np.zeros(nlp.neq)
    ev = nlp.eval_all(x)
    z = np.maximum(-ev["h"], 1.0)
    mu = np.maximum(1.0 / z, 1.0)

    status, reason, it = FAILED, "iteration limit", 0
    for it in range(1, max_iter + 1):
        ev = nlp.eval_all(x)
        res = nlp.kkt(ev, lam, mu, z)
        if res.passed(tol):
            status, reason = LOCAL_OPTIMUM, ""
            break
        if not np.isfinite(res.complementarity) or res.complementarity > 1e10:
            status, reason = FAILED, "diverged"
            break

        hl = nlp.lagrangian_hessian(ev, lam, mu)
        m_mat = hl + (ev["jh"].T * (mu / z)) @ ev["jh"]
        m_mat = 0.5 * (m_mat + m_mat.T)
        jg = ev["jg"]
        r_dual = ev["grad_f"] + jg.T @ lam + ev["jh"].T @ mu
        r_h = ev["h"] + z
        gap = float(z @ mu) / nlp.niq

        def directions(solver, gamma_target, extra_comp):
            r_c = z * mu - gamma_target + extra_comp
            sol = solver(-(r_dual) - ev["jh"].T @ ((mu * r_h - r_c) / z), -ev["g"])
            if sol is None:
                return None
            dx, dlam = sol
            dz = -r_h - ev["jh"] @ dx
            dmu = (-r_c - mu * dz) / z
            if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dz)) and np.all(np.isfinite(dmu))):
                return None
            return dx, dlam, dz, dmu

        def step_of(solver):
            """Safeguarded predictor-corrector direction with its step sizes."""
            aff = directions(solver, 0.0, 0.0)
            if aff is None:
                return None
            _, _, dz_a, dmu_a = aff
            a_pa, a_da = _max_step(z, dz_a), _max_step(mu, dmu_a)
            gap_aff = float((z + a_pa * dz_a) @ (mu + a_da * dmu_a)) / nlp.niq
            ratio = min(max(gap_aff, 0.0) / gap, 1.0) if gap > 0 else 0.5
            sigma = min(0.99, max(ratio**3, 1e-4))
            if min(a_pa, a_da) < 0.1:
                # affine probe unreliable: plain centering step instead
                corr = directions(solver, max(sigma, 0.5) * gap, 0.0)
            else:
                corr = directions(solver, sigma * gap, dz_a * dmu_a)
            if corr is None:
                return None
            dx, dlam, dz, dmu = corr
            return _max_step(z, dz), _max_step(mu, dmu), corr

        def score(result):
            return min(result[0], result[1]) + 0.1 * max(result[0], result[1])

        got = step_of(_saddle_lu_solver(m_mat, jg))
        if got is None or min(got[0], got[1]) < 0.1:
            # indefinite or near-singular system: also try a direction with the
            # condensed block forced positive definite, keep the better stepper
            pd = _saddle_pd_solver(m_mat, jg)
            alt = step_of(pd) if pd is not None else None
            if alt is not None and (got is None or score(alt) > score(got)):
                got = alt
        if got is None:
            status, reason = FAILED, "singular KKT system"
            break
        a_p, a_d, (dx, dlam, dz, dmu) = got
        if max(a_p, a_d) < 1e-12:
            status, reason = FAILED, "step collapse (restoration failure)"
            break
        x = x + a_p * dx
        z = z + a_p * dz
        lam = lam + a_d * dlam
        mu = mu + a_d * dmu

    v = nlp.voltages(x)
    ev = nlp.eval_all(x)
    res = nlp.kkt(ev, lam, mu, z)
    point_eval = evaluate_point(case, nlp.model, v)
    report = check_feasibility(case, v, nlp.model)

    if status == LOCAL_OPTIMUM and _has_negative_curvature(nlp, ev, lam, mu, z):
        status = STATIONARY_ONLY
    if status == LOCAL_OPTIMUM and not report.is_feasible:
        # converged KKT but infeasible at the reporting tolerance
        status, reason = FAILED, "converged to infeasible point"

    return OpfPoint(
        v=v,
        p_gen=point_eval.p_gen,
        q_gen=point_eval.q_gen,
        objective=point_eval.objective,
        status=status,
        binding=report,
        kkt=res,
        multipliers={"lambda": lam, "mu": mu, "z": z},
        iterations=it,
        reason=reason,
    )


def _has_negative_curvature(nlp, ev, lam, mu, z, tol=1e-6, active_tol=1e-6):
    """True when the reduced Hessian has an eigenvalue below -tol."""
    rows = [ev["jg"]] if nlp.neq else []
    act = z < active_tol * (1.0 + np.abs([r.bound for r in nlp.iq_rows]))
    if act.any():
        rows.append(ev["jh"][act])
    hl = nlp.lagrangian_hessian(ev, lam, mu)
    if rows:
        ja = np.vstack(rows)
        _, sv, vt = np.linalg.svd(ja, full_matrices=True)
        rank = int(np.sum(sv > 1e-8 * max(1.0, sv[0] if len(sv) else 1.0)))
        null = vt[rank:].T
    else:
        null = np.eye(nlp.nx)
    if null.shape[1] == 0:
        return False
    red = null.T @ hl @ null
    w = np.linalg.eigvalsh(0.5 * (red + red.T))
    return bool(w[0] < -tol)


def kkt_residual(case: Case, point: OpfPoint, multipliers=None) -> KktResiduals:
    """First-order optimality residuals at a point, from stored multipliers."""
    mult = multipliers if multipliers is not None else point.multipliers
    if mult is None:
        raise ValueError("no multipliers available")
    nlp = _OpfNlp(case)
    vm, va = np.abs(point.v), np.angle(point.v)
    va = va - va[nlp.ref]
    ev = nlp.eval_all(nlp.pack(vm, va))
    return nlp.kkt(ev, np.asarray(mult["lambda"]), np.asarray(mult["mu"]), np.asarray(mult["z"]))


# --------------------------------------------------------------------------
# multistart local-optima search


def _random_start(case: Case, model, rng):
    """Power-flow solution at random setpoints, or the raw sample if it fails."""
    v_set, p_set = {}, {}
    for g in case.gens:
        b = case.buses[case.bus_index[g.bus]]
        v_set[g.bus] = rng.uniform(b.v_min, b.v_max)
        if g.bus != case.ref_bus:
            p_set[g.bus] = rng.uniform(g.p_min, g.p_max)
    spec = pflow.spec_from_setpoints(case, v_set, p_set)
    sys_ = pflow.build_system(case, model, spec)
    n = case.n
    e0 = np.array([v_set.get(b.id, 1.0) for b in case.buses])
    x0 = np.concatenate([np.delete(e0, case.ref_index), np.zeros(n - 1)])
    res = pflow.newton_solve(sys_, x0)
    if res.converged:
        return np.abs(res.v), np.angle(res.v)
    return e0, np.zeros(n)


def multistart(case: Case, n_starts: int = 200, seed: int = 0,
               model: AdmittanceModel | None = None) -> LocalOptimaSet:
    """Search for distinct local optima: one flat start plus random
    power-flow-seeded starts, deduplicated on the voltage vector."""
    if model is None:
        model = build_admittance(case)
    rng = np.random.default_rng(seed)
    inits = [None]
    for _ in range(max(0, n_starts - 1)):
        inits.append(_random_start(case, model, rng))

    solutions = []
    n_failed = n_stationary = 0
    for init in inits:
        pt = solve_local(case, init=init, model=model)
        if pt.status == LOCAL_OPTIMUM:
            solutions.append(pt)
        elif pt.status == STATIONARY_ONLY:
            n_stationary += 1
        else:
            n_failed += 1

    distinct: list[OpfPoint] = []
    counts: list[int] = []
    for pt in solutions:
        placed = False
        for i, ref in enumerate(distinct):
            if np.max(np.abs(pt.v - ref.v)) <= DEDUPE_RADIUS:
                counts[i] += 1
                if pt.objective < ref.objective:
                    distinct[i] = pt
                placed = True
                break
        if not placed:
            distinct.append(pt)
            counts.append(1)
    order = sorted(range(len(distinct)), key=lambda i: distinct[i].objective)
    return LocalOptimaSet(
        points=[distinct[i] for i in order],
        basin_counts=[counts[i] for i in order],
        n_starts=len(inits),
        n_failed=n_failed,
        n_stationary=n_stationary,
    )
