"""Power flow as a quadratic polynomial system, with exhaustive solution enumeration.

The power-flow equations are written in rectangular voltage coordinates, where
every equation is a degree-2 polynomial with real coefficients.  A total-degree
homotopy then tracks all 2^(2(n-1)) continuation paths, which at this scale
(n <= 6) is guaranteed to find every isolated solution or certify that none
exist.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netmodel import AdmittanceModel, Case, build_admittance, hermitian_embedding

__all__ = [
    "PowerFlowSpec",
    "QuadraticSystem",
    "SolutionSet",
    "spec_from_setpoints",
    "build_system",
    "newton_solve",
    "enumerate_solutions",
    "TOL_PF",
]

TOL_PF = 1e-10  # residual infinity-norm for an accepted solution
DIVERGE_NORM = 1e6
STUCK_NORM = 1e3  # stalled beyond this norm counts as at-infinity
IMAG_TOL = 1e-6  # max imaginary part for a physically real endpoint
DEDUPE_RADIUS = 1e-6
MIN_STEP = 1e-8

SLACK, PV, PQ = "slack", "pv", "pq"


@dataclass(frozen=True)
class PowerFlowSpec:
    """Per-bus role and fixed quantities, in per unit.

    roles[i] is one of slack/pv/pq for bus position i.  The slack bus fixes
    |V| (angle 0); pv fixes net active injection and |V|; pq fixes net active
    and reactive injection.
    """

    roles: tuple[str, ...]
    v_set: tuple[float, ...]  # |V| for slack/pv positions, ignored for pq
    p_set: tuple[float, ...]  # net P for pv/pq positions
    q_set: tuple[float, ...]  # net Q for pq positions

    def __post_init__(self):
        if self.roles.count(SLACK) != 1:
            raise ValueError("exactly one slack bus required")
        if not all(r in (SLACK, PV, PQ) for r in self.roles):
            raise ValueError("roles must be slack/pv/pq")

    @property
    def slack_index(self):
        return self.roles.index(SLACK)


def spec_from_setpoints(case: Case, v_set: dict[int, float], p_set: dict[int, float]) -> PowerFlowSpec:
    """Build a spec from generator setpoints; loads come from the case.

    ``v_set`` maps generator bus id -> |V| and must cover every generator bus;
    ``p_set`` maps non-slack generator bus id -> dispatch in MW.
    """
    base = case.base_mva
    roles, vs, ps, qs = [], [], [], []
    for b in case.buses:
        if b.id in case.gen_bus_index:
            if b.id not in v_set:
                raise ValueError(f"no voltage setpoint for generator bus {b.id}")
            if b.id == case.ref_bus:
                roles.append(SLACK)
                ps.append(0.0)
            else:
                if b.id not in p_set:
                    raise ValueError(f"no dispatch for generator bus {b.id}")
                roles.append(PV)
                ps.append((p_set[b.id] - b.p_load) / base)
            vs.append(v_set[b.id])
            qs.append(0.0)
        else:
            roles.append(PQ)
            vs.append(0.0)
            ps.append(-b.p_load / base)
            qs.append(-b.q_load / base)
    return PowerFlowSpec(roles=tuple(roles), v_set=tuple(vs), p_set=tuple(ps), q_set=tuple(qs))


@dataclass
class QuadraticSystem:
    """m = 2(n-1) quadratic equations over the free rectangular coordinates.

    Coordinates are z = [Re V; Im V] (length 2n); the slack pair is fixed and
    every other pair is free.  Equation i reads z' M[i] z = target[i].
    """

    mats: np.ndarray  # (m, 2n, 2n) real symmetric
    targets: np.ndarray  # (m,)
    free: np.ndarray  # indices into 2n, length m
    z_fixed: np.ndarray  # (2n,) with slack coordinates set
    labels: tuple[str, ...]  # per-equation description, diagnostics only

    @property
    def n_unknowns(self):
        return len(self.free)

    def full_z(self, x):
        """Insert free coordinates into the fixed background; x may be complex
        and batched with shape (..., m)."""
        z = np.broadcast_to(self.z_fixed, x.shape[:-1] + self.z_fixed.shape).astype(x.dtype).copy()
        z[..., self.free] = x
        return z

    def residual(self, x):
        z = self.full_z(np.atleast_2d(x))
        vals = np.einsum("pi,eij,pj->pe", z, self.mats, z) - self.targets
        return vals[0] if np.ndim(x) == 1 else vals

    def jacobian(self, x):
        z = self.full_z(np.atleast_2d(x))
        j = 2.0 * np.einsum("eij,pj->pei", self.mats, z)[:, :, self.free]
        return j[0] if np.ndim(x) == 1 else j

    def voltages(self, x):
        """Free-coordinate vector -> full complex voltage vector."""
        z = self.full_z(np.asarray(x))
        n = len(self.z_fixed) // 2
        return z[..., :n] + 1j * z[..., n:]


def build_system(case: Case, model: AdmittanceModel, spec: PowerFlowSpec) -> QuadraticSystem:
    """Assemble the quadratic power-flow system for a fixed-injection spec."""
    n = case.n
    if len(spec.roles) != n:
        raise ValueError("spec does not match case size")
    sl = spec.slack_index
    free = [k for k in range(n) if k != sl] + [n + k for k in range(n) if k != sl]
    z_fixed = np.zeros(2 * n)
    z_fixed[sl] = spec.v_set[sl]  # slack angle is 0

    mats, targets, labels = [], [], []
    for k in range(n):
        role = spec.roles[k]
        if role == SLACK:
            continue
        mats.append(hermitian_embedding(model.h(k)))
        targets.append(spec.p_set[k])
        labels.append(f"P@{case.buses[k].id}")
        if role == PQ:
            mats.append(hermitian_embedding(model.h_tilde(k)))
            targets.append(spec.q_set[k])
            labels.append(f"Q@{case.buses[k].id}")
        else:  # pv: |V_k|^2 fixed
            m = np.zeros((2 * n, 2 * n))
            m[k, k] = 1.0
            m[n + k, n + k] = 1.0
            mats.append(m)
            targets.append(spec.v_set[k] ** 2)
            labels.append(f"V2@{case.buses[k].id}")
    return QuadraticSystem(
        mats=np.array(mats),
        targets=np.array(targets),
        free=np.array(free),
        z_fixed=z_fixed,
        labels=tuple(labels),
    )


@dataclass
class NewtonResult:
    converged: bool
    x: np.ndarray
    v: np.ndarray | None
    residual: float
    iterations: int
    reason: str = ""


def newton_solve(sys: QuadraticSystem, init, max_iter: int = 50, tol: float = TOL_PF) -> NewtonResult:
    """Plain Newton on the quadratic system from a real starting vector."""
    x = np.asarray(init, dtype=float).copy()
    if not np.all(np.isfinite(x)):
        raise ValueError("initial point must be finite")
    for it in range(max_iter):
        r = sys.residual(x)
        rn = float(np.max(np.abs(r)))
        if rn < tol:
            return NewtonResult(True, x, sys.voltages(x), rn, it)
        j = sys.jacobian(x)
        try:
            step = np.linalg.solve(j, -r)
        except np.linalg.LinAlgError:
            return NewtonResult(False, x, None, rn, it, reason="singular Jacobian")
        x = x + step
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGE_NORM:
            return NewtonResult(False, x, None, np.inf, it, reason="diverged")
    rn = float(np.max(np.abs(sys.residual(x))))
    return NewtonResult(rn < tol, x, sys.voltages(x) if rn < tol else None, rn, max_iter, reason="iteration limit")


@dataclass
class SolutionSet:
    """All isolated real power-flow solutions found by the homotopy."""

    solutions: list[np.ndarray]  # full complex voltage vectors
    residuals: list[float]
    n_paths: int
    n_diverged: int
    n_nonreal: int
    n_failed: int
    gamma_seed: int = 0

    @property
    def certified(self):
        # zero failed paths means the homotopy accounted for every root
        return self.n_failed == 0

    def __len__(self):
        return len(self.solutions)


def _start_points(m, rng):
    """Start system x_i^2 = c_i with random complex c_i; returns (c, roots).

    roots has shape (2^m, m): every sign combination of sqrt(c_i).
    """
    c = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, m)) * rng.uniform(0.7, 1.3, m)
    base = np.sqrt(c)
    signs = np.array(np.meshgrid(*([[1.0, -1.0]] * m), indexing="ij")).reshape(m, -1).T
    return c, signs * base


def _track_paths(sys: QuadraticSystem, gamma, c, starts, max_rounds=3000):
    """Batched predictor-corrector tracking of H(x,t) = (1-t) gamma (x^2-c) + t F(x).

    Returns (endpoints, status) with status in {0 converged, 1 diverged, 2 failed}.
    """
    n_paths, m = starts.shape
    x = starts.astype(complex).copy()
    t = np.zeros(n_paths)
    dt = np.full(n_paths, 0.1)
    streak = np.zeros(n_paths, dtype=int)
    status = np.full(n_paths, -1, dtype=int)  # -1 active

    def h_and_jac(xa, ta):
        za = sys.full_z(xa)
        f = np.einsum("pi,eij,pj->pe", za, sys.mats, za) - sys.targets
        jf = 2.0 * np.einsum("eij,pj->pei", sys.mats, za)[:, :, sys.free]
        g = xa * xa - c
        h = (1.0 - ta)[:, None] * gamma * g + ta[:, None] * f
        jh = ta[:, None, None] * jf
        idx = np.arange(m)
        jh[:, idx, idx] += ((1.0 - ta) * gamma)[:, None] * 2.0 * xa
        dh_dt = f - gamma * g
        return h, jh, dh_dt

    for _ in range(max_rounds):
        active = status == -1
        if not active.any():
            break
        xa, ta, dta = x[active], t[active], dt[active]
        dta = np.minimum(dta, 1.0 - ta)
        _, jh, dh_dt = h_and_jac(xa, ta)
        try:
            tangent = np.linalg.solve(jh, -dh_dt[..., None])[..., 0]
        except np.linalg.LinAlgError:
            tangent = np.stack([np.linalg.lstsq(jh[i], -dh_dt[i], rcond=None)[0] for i in range(len(xa))])
        x_pred = xa + tangent * dta[:, None]
        t_new = ta + dta

        # Newton corrector at fixed t
        ok = np.ones(len(xa), dtype=bool)
        xc = x_pred
        for _ in range(3):
            hc, jc, _ = h_and_jac(xc, t_new)
            try:
                delta = np.linalg.solve(jc, -hc[..., None])[..., 0]
            except np.linalg.LinAlgError:
                delta = np.stack([np.linalg.lstsq(jc[i], -hc[i], rcond=None)[0] for i in range(len(xc))])
            xc = xc + delta
            bad = ~np.isfinite(xc).all(axis=1)
            xc[bad] = 0.0
            ok &= ~bad
        hc, _, _ = h_and_jac(xc, t_new)
        scale = 1.0 + np.abs(xc).max(axis=1)
        ok &= np.abs(hc).max(axis=1) < 1e-8 * scale

        idx = np.flatnonzero(active)
        acc = idx[ok]
        x[acc] = xc[ok]
        t[acc] = t_new[ok]
        streak[acc] += 1
        dt[acc[streak[acc] >= 3]] *= 2.0
        dt[acc] = np.clip(dt[acc], MIN_STEP, 0.2)
        rej = idx[~ok]
        dt[rej] *= 0.5
        streak[rej] = 0
        stuck = rej[dt[rej] < MIN_STEP]
        # a stalled path far from the physical scale is heading to infinity;
        # only a stall at moderate norm counts as a genuine tracking failure
        far = np.abs(x[stuck]).max(axis=1) > STUCK_NORM if len(stuck) else np.zeros(0, bool)
        status[stuck[far]] = 1
        status[stuck[~far]] = 2

        big = idx[np.abs(x[idx]).max(axis=1) > DIVERGE_NORM]
        status[big] = 1
        # endgame: a large-norm path this close to t=1 is escaping to infinity
        live = np.flatnonzero(status == -1)
        esc = live[(t[live] > 0.99) & (np.abs(x[live]).max(axis=1) > STUCK_NORM)]
        status[esc] = 1
        done = np.flatnonzero((status == -1) & (t >= 1.0 - 1e-12))
        status[done] = 0
    leftover = status == -1  # ran out of rounds
    if leftover.any():
        far = np.abs(x[leftover]).max(axis=1) > STUCK_NORM
        idx = np.flatnonzero(leftover)
        status[idx[far]] = 1
        status[idx[~far]] = 2
    return x, status


def _polish_complex(sys, x, tol=1e-12, iters=20):
    x = x.copy()
    for _ in range(iters):
        r = sys.residual(x)
        if np.max(np.abs(r)) < tol:
            break
        try:
            x = x + np.linalg.solve(sys.jacobian(x), -r)
        except np.linalg.LinAlgError:
            break
    return x


def enumerate_solutions(sys: QuadraticSystem, gamma_seed: int = 0) -> SolutionSet:
    """Track every total-degree path and collect the real, polished endpoints.

    Guarded to desk scale: 2(n-1) <= 10 unknowns (1024 paths).  The returned
    set is independent of gamma_seed for regular systems; a result with
    ``certified`` False (some path failed) must not be read as exhaustive.
    """
    m = sys.n_unknowns
    if m > 10:
        raise ValueError(f"{m} unknowns exceeds the enumeration guard (10)")
    rng = np.random.default_rng(gamma_seed)
    gamma = np.exp(1j * rng.uniform(0.05, 2.0 * np.pi - 0.05))
    c, starts = _start_points(m, rng)
    endpoints, status = _track_paths(sys, gamma, c, starts)

    n_diverged = int(np.sum(status == 1))
    n_failed = int(np.sum(status == 2))

    accepted = []  # (complex endpoint, real solution x)
    n_nonreal = 0
    for i in np.flatnonzero(status == 0):
        xe = _polish_complex(sys, endpoints[i])
        if np.max(np.abs(xe)) > DIVERGE_NORM:
            n_diverged += 1
            continue
        if np.max(np.abs(xe.imag)) >= IMAG_TOL:
            n_nonreal += 1
            continue
        res = newton_solve(sys, xe.real)
        if not res.converged:
            n_failed += 1
            continue
        accepted.append((xe, res))

    kept: list[tuple[np.ndarray, NewtonResult]] = []
    for xe, res in accepted:  # start-index order keeps dedupe deterministic
        if any(np.max(np.abs(xe - prev)) <= DEDUPE_RADIUS for prev, _ in kept):
            continue
        kept.append((xe, res))

    return SolutionSet(
        solutions=[r.v for _, r in kept],
        residuals=[r.residual for _, r in kept],
        n_paths=len(starts),
        n_diverged=n_diverged,
        n_nonreal=n_nonreal,
        n_failed=n_failed,
        gamma_seed=gamma_seed,
    )
