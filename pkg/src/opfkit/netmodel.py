"""Network data model, case-file I/O, admittance construction, and constraint evaluation.

All electrical computation is done in per unit on the case's MVA base.  File
I/O keeps loads and generator limits in MW/MVAr, branch impedances and voltage
bounds in per unit, matching the common exchange format.
"""

from __future__ import annotations

import cmath
import json
import re
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

__all__ = [
    "Bus",
    "Generator",
    "Branch",
    "CostPoly",
    "Case",
    "AdmittanceModel",
    "PointEval",
    "ConstraintEntry",
    "ConstraintReport",
    "CaseError",
    "ParseError",
    "parse_case",
    "emit_case",
    "build_admittance",
    "evaluate_point",
    "check_feasibility",
    "EPS_BIND",
]

# Binding-label tolerance, in per unit of the constraint's natural quantity.
EPS_BIND = 1e-4


class CaseError(ValueError):
    """Invalid network data."""


class ParseError(CaseError):
    """Malformed case file; carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass(frozen=True)
class Bus:
    id: int
    p_load: float = 0.0  # MW
    q_load: float = 0.0  # MVAr
    v_min: float = 0.9  # p.u.
    v_max: float = 1.1  # p.u.
    shunt_g: float = 0.0  # p.u. admittance
    shunt_b: float = 0.0  # p.u. admittance

    def __post_init__(self):
        if not (0.0 < self.v_min <= self.v_max):
            raise CaseError(f"bus {self.id}: need 0 < v_min <= v_max, got [{self.v_min}, {self.v_max}]")


@dataclass(frozen=True)
class Generator:
    bus: int
    p_min: float  # MW
    p_max: float  # MW
    q_min: float  # MVAr
    q_max: float  # MVAr

    def __post_init__(self):
        if self.p_min > self.p_max:
            raise CaseError(f"generator at bus {self.bus}: p_min > p_max")
        if self.q_min > self.q_max:
            raise CaseError(f"generator at bus {self.bus}: q_min > q_max")


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    r: float  # p.u.
    x: float  # p.u.
    b_sh: float = 0.0  # total shunt susceptance, p.u.
    tap: float = 1.0  # ratio, applied on the from side
    shift: float = 0.0  # degrees
    s_max: float = 0.0  # MVA; 0 means unlimited

    def __post_init__(self):
        if self.r == 0.0 and self.x == 0.0:
            raise CaseError(f"branch {self.from_bus}-{self.to_bus}: zero series impedance")
        if self.tap <= 0.0:
            raise CaseError(f"branch {self.from_bus}-{self.to_bus}: tap must be positive")
        if self.from_bus == self.to_bus:
            raise CaseError(f"branch {self.from_bus}-{self.to_bus}: self loop")


@dataclass(frozen=True)
class CostPoly:
    c2: float  # $/(MW h)^2
    c1: float  # $/(MW h)
    c0: float  # $/h

    def __post_init__(self):
        if self.c2 < 0.0:
            raise CaseError("cost polynomial must be convex (c2 >= 0)")

    def __call__(self, p_mw):
        return (self.c2 * p_mw + self.c1) * p_mw + self.c0


@dataclass(frozen=True)
class Case:
    """One OPF instance: network, limits, and generation costs.

    ``costs[i]`` belongs to ``gens[i]``.  ``ref_bus`` designates the single
    slack / angle-reference bus.  Buses without a generator have implicit
    generation limits of exactly zero.
    """

    base_mva: float
    buses: tuple[Bus, ...]
    gens: tuple[Generator, ...]
    branches: tuple[Branch, ...]
    costs: tuple[CostPoly, ...]
    ref_bus: int
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "gens", tuple(self.gens))
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "costs", tuple(self.costs))
        if self.base_mva <= 0.0:
            raise CaseError("base_mva must be positive")
        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            dup = sorted(i for i in set(ids) if ids.count(i) > 1)
            raise CaseError(f"duplicate bus id {dup[0]}")
        known = set(ids)
        for g in self.gens:
            if g.bus not in known:
                raise CaseError(f"generator references unknown bus {g.bus}")
        for br in self.branches:
            if br.from_bus not in known or br.to_bus not in known:
                raise CaseError(f"branch {br.from_bus}-{br.to_bus} references unknown bus")
        if len(self.costs) != len(self.gens):
            raise CaseError("need exactly one cost polynomial per generator")
        if self.ref_bus not in known:
            raise CaseError(f"reference bus {self.ref_bus} does not exist")

    @property
    def n(self):
        return len(self.buses)

    @cached_property
    def bus_index(self) -> dict[int, int]:
        """Bus id -> position in ``buses``."""
        return {b.id: i for i, b in enumerate(self.buses)}

    @cached_property
    def gen_bus_index(self) -> dict[int, int]:
        """Bus id -> position in ``gens`` (one generator per bus after aggregation)."""
        out = {}
        for i, g in enumerate(self.gens):
            if g.bus in out:
                raise CaseError(f"bus {g.bus} carries more than one generator; aggregate first")
            out[g.bus] = i
        return out

    @property
    def ref_index(self):
        return self.bus_index[self.ref_bus]

    def p_limits_pu(self):
        """Net active-injection bounds per bus, p.u. (load subtracted, zero limits off-generator)."""
        lo = np.empty(self.n)
        hi = np.empty(self.n)
        for i, b in enumerate(self.buses):
            gi = self.gen_bus_index.get(b.id)
            pmin, pmax = (self.gens[gi].p_min, self.gens[gi].p_max) if gi is not None else (0.0, 0.0)
            lo[i] = (pmin - b.p_load) / self.base_mva
            hi[i] = (pmax - b.p_load) / self.base_mva
        return lo, hi

    def q_limits_pu(self):
        lo = np.empty(self.n)
        hi = np.empty(self.n)
        for i, b in enumerate(self.buses):
            gi = self.gen_bus_index.get(b.id)
            qmin, qmax = (self.gens[gi].q_min, self.gens[gi].q_max) if gi is not None else (0.0, 0.0)
            lo[i] = (qmin - b.q_load) / self.base_mva
            hi[i] = (qmax - b.q_load) / self.base_mva
        return lo, hi


# --------------------------------------------------------------------------
# admittance and the lifted constraint matrices


def _branch_admittance(br: Branch):
    """(y_ff, y_ft, y_tf, y_tt) for one branch, from-side tap tau*e^{j shift}."""
    ys = 1.0 / complex(br.r, br.x)
    ysh = 0.5j * br.b_sh
    tau = br.tap
    phase = cmath.exp(1j * np.deg2rad(br.shift))
    # Orientation follows the lifted flow matrices: the from-side current is
    # ((ys+ysh)/tau^2) V_f - (ys/(tau*phase)) V_t.
    y_ff = (ys + ysh) / (tau * tau)
    y_ft = -ys / (tau * phase)
    y_tf = -ys * phase / tau
    y_tt = ys + ysh
    return y_ff, y_ft, y_tf, y_tt


@dataclass
class AdmittanceModel:
    """Bus admittance matrix plus the lifted injection/flow matrices.

    ``h(k)``/``h_tilde(k)`` give the Hermitian matrices whose trace against
    W = V V^H yields the net active/reactive injection at bus k.  ``f_fwd``/
    ``f_rev`` give the per-branch flow matrices for the two line ends.  The
    matrices are built on demand; only Y is stored densely.
    """

    y_bus: np.ndarray  # (n, n) complex
    branch_idx: tuple[tuple[int, int], ...]  # (from, to) positional indices per branch
    branch_adm: tuple[tuple[complex, complex, complex, complex], ...]

    @property
    def n(self):
        return self.y_bus.shape[0]

    def h(self, k: int) -> np.ndarray:
        n = self.n
        out = np.zeros((n, n), dtype=complex)
        out[:, k] += 0.5 * np.conj(self.y_bus[k, :])
        out[k, :] += 0.5 * self.y_bus[k, :]
        return out

    def h_tilde(self, k: int) -> np.ndarray:
        n = self.n
        out = np.zeros((n, n), dtype=complex)
        out[:, k] += np.conj(self.y_bus[k, :]) / (2.0 * 1j)
        out[k, :] -= self.y_bus[k, :] / (2.0 * 1j)
        return out

    def f_fwd(self, idx: int) -> np.ndarray:
        l, m = self.branch_idx[idx]
        y_ff, y_ft, _, _ = self.branch_adm[idx]
        out = np.zeros((self.n, self.n), dtype=complex)
        out[l, l] = np.conj(y_ff)
        out[m, l] = np.conj(y_ft)
        return out

    def f_rev(self, idx: int) -> np.ndarray:
        l, m = self.branch_idx[idx]
        _, _, y_tf, y_tt = self.branch_adm[idx]
        out = np.zeros((self.n, self.n), dtype=complex)
        out[m, m] = np.conj(y_tt)
        out[l, m] = np.conj(y_tf)
        return out

    def branch_flows(self, v: np.ndarray):
        """Complex power entering each branch at its two ends, p.u.

        Returns (s_fwd, s_rev), each shape (n_branch,).
        """
        nb = len(self.branch_idx)
        s_fwd = np.empty(nb, dtype=complex)
        s_rev = np.empty(nb, dtype=complex)
        for i, (l, m) in enumerate(self.branch_idx):
            y_ff, y_ft, y_tf, y_tt = self.branch_adm[i]
            s_fwd[i] = v[l] * np.conj(y_ff * v[l] + y_ft * v[m])
            s_rev[i] = v[m] * np.conj(y_tf * v[l] + y_tt * v[m])
        return s_fwd, s_rev

    def injections(self, v: np.ndarray) -> np.ndarray:
        """Net complex power injection per bus, p.u.: S = V o conj(Y V)."""
        return v * np.conj(self.y_bus @ v)


def build_admittance(case: Case) -> AdmittanceModel:
    """Assemble Y from pi-model branches and bus shunts."""
    n = case.n
    idx = case.bus_index
    y = np.zeros((n, n), dtype=complex)
    branch_idx = []
    branch_adm = []
    for br in case.branches:
        if br.r == 0.0 and br.x == 0.0:
            raise CaseError(f"branch {br.from_bus}-{br.to_bus}: singular impedance")
        l, m = idx[br.from_bus], idx[br.to_bus]
        adm = _branch_admittance(br)
        y_ff, y_ft, y_tf, y_tt = adm
        y[l, l] += y_ff
        y[l, m] += y_ft
        y[m, l] += y_tf
        y[m, m] += y_tt
        branch_idx.append((l, m))
        branch_adm.append(adm)
    for i, b in enumerate(case.buses):
        y[i, i] += complex(b.shunt_g, b.shunt_b)
    return AdmittanceModel(y_bus=y, branch_idx=tuple(branch_idx), branch_adm=tuple(branch_adm))


def hermitian_embedding(m: np.ndarray) -> np.ndarray:
    """Real symmetric embedding [[Re M, -Im M], [Im M, Re M]] of a Hermitian M."""
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


# --------------------------------------------------------------------------
# point evaluation and feasibility


@dataclass
class PointEval:
    """Physics quantities at one voltage vector.

    Injections are net per-bus values in per unit.  ``sq_flow_*`` hold the
    squared-flow form 4(P^2+Q^2) per branch end in per unit, to be compared
    against 4(s_max/base)^2.  Dispatch and the objective are in MW/MVAr/$ per
    hour.
    """

    v: np.ndarray
    p_inj: np.ndarray  # p.u.
    q_inj: np.ndarray  # p.u.
    sq_flow_fwd: np.ndarray  # p.u.^2, = 4|S_fwd|^2
    sq_flow_rev: np.ndarray
    p_gen: np.ndarray  # MW, per case.gens order
    q_gen: np.ndarray  # MVAr
    objective: float  # $/hr


def evaluate_point(case: Case, model: AdmittanceModel, v: np.ndarray) -> PointEval:
    """Evaluate injections, branch flows, and generation cost at voltage v (p.u.)."""
    v = np.asarray(v, dtype=complex)
    if v.shape != (case.n,):
        raise ValueError(f"voltage vector must have length {case.n}")
    s = model.injections(v)
    s_fwd, s_rev = model.branch_flows(v)
    sq_fwd = 4.0 * (s_fwd.real**2 + s_fwd.imag**2)
    sq_rev = 4.0 * (s_rev.real**2 + s_rev.imag**2)
    p_gen = np.empty(len(case.gens))
    q_gen = np.empty(len(case.gens))
    obj = 0.0
    for i, g in enumerate(case.gens):
        k = case.bus_index[g.bus]
        bus = case.buses[k]
        p_gen[i] = s[k].real * case.base_mva + bus.p_load
        q_gen[i] = s[k].imag * case.base_mva + bus.q_load
        obj += case.costs[i](p_gen[i])
    return PointEval(
        v=v,
        p_inj=s.real,
        q_inj=s.imag,
        sq_flow_fwd=sq_fwd,
        sq_flow_rev=sq_rev,
        p_gen=p_gen,
        q_gen=q_gen,
        objective=obj,
    )


VIOLATED, BINDING, INTERIOR = "violated", "binding", "interior"


@dataclass(frozen=True)
class ConstraintEntry:
    kind: str  # P-lower|P-upper|Q-lower|Q-upper|V-lower|V-upper|flow-fwd|flow-rev
    location: int  # bus id, or branch index for flow kinds
    slack: float  # natural units: MW, MVAr, p.u. voltage, MVA
    status: str
    degenerate: bool = False  # lower == upper (equality-type row, not an engineering limit)


_LABEL_CODE = {
    "P-lower": "Pmin",
    "P-upper": "Pmax",
    "Q-lower": "Qmin",
    "Q-upper": "Qmax",
    "V-lower": "Vmin",
    "V-upper": "Vmax",
    "flow-fwd": "Sfwd",
    "flow-rev": "Srev",
}


@dataclass
class ConstraintReport:
    entries: list[ConstraintEntry]

    @property
    def is_feasible(self):
        return not any(e.status == VIOLATED for e in self.entries)

    def violations(self):
        return [e for e in self.entries if e.status == VIOLATED]

    def binding(self, include_degenerate=False):
        return [
            e
            for e in self.entries
            if e.status == BINDING and (include_degenerate or not e.degenerate)
        ]

    def binding_labels(self):
        """Labels like ``Vmin@2`` for binding engineering limits (degenerate
        equality rows, e.g. load-bus power balance, are skipped)."""
        return [f"{_LABEL_CODE[e.kind]}@{e.location}" for e in self.binding()]

    def min_slack_pu(self, base_mva: float):
        """Most negative per-unit slack; >= 0 means feasible."""
        vals = []
        for e in self.entries:
            scale = base_mva if e.kind[0] in "PQ" or e.kind.startswith("flow") else 1.0
            vals.append(e.slack / scale)
        return min(vals) if vals else float("inf")


def _classify(slack_pu, eps_bind):
    if slack_pu < -eps_bind:
        return VIOLATED
    if slack_pu <= eps_bind:
        return BINDING
    return INTERIOR


def check_feasibility(case: Case, v, model: AdmittanceModel | None = None, eps_bind: float = EPS_BIND) -> ConstraintReport:
    """Classify every operating constraint at voltage v.

    A point is feasible iff no entry is violated.  Binding means the per-unit
    slack is within ``eps_bind`` of zero.
    """
    if model is None:
        model = build_admittance(case)
    ev = evaluate_point(case, model, v)
    base = case.base_mva
    entries = []

    def two_sided(kind, loc, value_pu, lo_pu, hi_pu, unit_scale):
        degen = hi_pu - lo_pu <= 1e-12
        for which, slack_pu in (("lower", value_pu - lo_pu), ("upper", hi_pu - value_pu)):
            entries.append(
                ConstraintEntry(
                    kind=f"{kind}-{which}",
                    location=loc,
                    slack=slack_pu * unit_scale,
                    status=_classify(slack_pu, eps_bind),
                    degenerate=degen,
                )
            )

    p_lo, p_hi = case.p_limits_pu()
    q_lo, q_hi = case.q_limits_pu()
    vm = np.abs(ev.v)
    for i, b in enumerate(case.buses):
        two_sided("P", b.id, ev.p_inj[i], p_lo[i], p_hi[i], base)
        two_sided("Q", b.id, ev.q_inj[i], q_lo[i], q_hi[i], base)
        two_sided("V", b.id, vm[i], b.v_min, b.v_max, 1.0)
    for bi, br in enumerate(case.branches):
        if br.s_max <= 0.0:
            continue
        smax_pu = br.s_max / base
        for kind, sq in (("flow-fwd", ev.sq_flow_fwd[bi]), ("flow-rev", ev.sq_flow_rev[bi])):
            # slack in MVA: s_max - |S|, equivalent sign to the squared form
            mag = 0.5 * np.sqrt(sq)
            slack_pu = smax_pu - mag
            entries.append(
                ConstraintEntry(
                    kind=kind,
                    location=bi,
                    slack=slack_pu * base,
                    status=_classify(slack_pu, eps_bind),
                )
            )
    return ConstraintReport(entries=entries)


# --------------------------------------------------------------------------
# case-file parsing


_REQUIRED_MATRICES = ("bus", "gen", "branch", "gencost")


def _strip_comments(line):
    out = []
    for ch in line:
        if ch == "%":
            break
        out.append(ch)
    return "".join(out)


def _extract_matrices(text):
    """Pull ``mpc.<name> = [...]`` numeric blocks out of an m-file.

    Returns {name: (rows, start_line)} with rows as float lists.  Works on the
    function-style files: assignments may span lines; ``;`` or newline ends a
    row; ``%`` starts a comment.
    """
    lines = text.splitlines()
    matrices = {}
    scalars = {}
    i = 0
    n_lines = len(lines)
    assign = re.compile(r"^\s*(?:mpc\.)?(\w+)\s*=\s*(.*)$")
    while i < n_lines:
        raw = _strip_comments(lines[i])
        m = assign.match(raw)
        if not m:
            i += 1
            continue
        name, rest = m.group(1), m.group(2).strip()
        if not rest.startswith("["):
            # scalar like baseMVA = 100; or version = '2';
            val = rest.rstrip(";").strip().strip("'\"")
            scalars[name] = (val, i + 1)
            i += 1
            continue
        start_line = i + 1
        body = [rest[1:]]
        closed = rest.find("]") >= 0
        j = i
        while not closed:
            j += 1
            if j >= n_lines:
                raise ParseError(f"matrix '{name}' is never closed", line=start_line)
            chunk = _strip_comments(lines[j])
            body.append(chunk)
            closed = chunk.find("]") >= 0
        blob = "\n".join(body)
        blob = blob[: blob.index("]")]
        rows = []
        for off, row_text in enumerate(blob.split("\n")):
            for piece in row_text.split(";"):
                piece = piece.strip()
                if not piece:
                    continue
                try:
                    rows.append([float(tok) for tok in piece.replace(",", " ").split()])
                except ValueError as exc:
                    raise ParseError(f"bad numeric row in '{name}': {exc}", line=start_line + off) from None
        matrices[name] = (rows, start_line)
        i = j + 1
    return matrices, scalars


def _case_from_mfile(text):
    matrices, scalars = _extract_matrices(text)
    for req in _REQUIRED_MATRICES:
        if req not in matrices:
            raise ParseError(f"missing required matrix '{req}'")
    if "baseMVA" not in scalars:
        raise ParseError("missing baseMVA")
    base = float(scalars["baseMVA"][0])

    bus_rows, bus_line = matrices["bus"]
    buses = []
    ref = None
    seen = set()
    for off, row in enumerate(bus_rows):
        if len(row) < 13:
            raise ParseError("bus row needs 13 columns", line=bus_line + off)
        bid = int(row[0])
        if bid in seen:
            raise ParseError(f"duplicate bus id {bid}", line=bus_line + off)
        seen.add(bid)
        if int(row[1]) == 3:
            if ref is not None:
                raise ParseError(f"second slack bus {bid}", line=bus_line + off)
            ref = bid
        buses.append(
            Bus(
                id=bid,
                p_load=row[2],
                q_load=row[3],
                shunt_g=row[4] / base,
                shunt_b=row[5] / base,
                v_max=row[11],
                v_min=row[12],
            )
        )
    if ref is None:
        raise ParseError("no slack bus (type 3) declared")

    gen_rows, gen_line = matrices["gen"]
    cost_rows, cost_line = matrices["gencost"]
    if len(cost_rows) == 2 * len(gen_rows):
        raise ParseError("reactive-power cost rows are not supported", line=cost_line)
    if len(cost_rows) != len(gen_rows):
        raise ParseError("gencost must have one row per generator", line=cost_line)

    gens = []
    costs = []
    for off, row in enumerate(gen_rows):
        if len(row) < 10:
            raise ParseError("gen row needs 10 columns", line=gen_line + off)
        if row[7] <= 0:  # out of service
            continue
        crow = cost_rows[off]
        if int(crow[0]) != 2:
            raise ParseError("only polynomial cost model 2 is accepted", line=cost_line + off)
        ncoef = int(crow[3])
        coefs = crow[4 : 4 + ncoef]
        if len(coefs) != ncoef:
            raise ParseError("gencost row shorter than its declared length", line=cost_line + off)
        if ncoef > 3 and any(c != 0.0 for c in coefs[:-3]):
            raise ParseError("cost polynomials above degree 2 are not supported", line=cost_line + off)
        coefs = coefs[-3:] if ncoef >= 3 else [0.0] * (3 - ncoef) + list(coefs)
        gens.append(Generator(bus=int(row[0]), p_min=row[9], p_max=row[8], q_min=row[4], q_max=row[3]))
        costs.append(CostPoly(c2=coefs[0], c1=coefs[1], c0=coefs[2]))

    br_rows, br_line = matrices["branch"]
    branches = []
    for off, row in enumerate(br_rows):
        if len(row) < 11:
            raise ParseError("branch row needs 11 columns", line=br_line + off)
        if row[10] <= 0:  # out of service
            continue
        ratio = row[8] if row[8] != 0.0 else 1.0
        branches.append(
            Branch(
                from_bus=int(row[0]),
                to_bus=int(row[1]),
                r=row[2],
                x=row[3],
                b_sh=row[4],
                s_max=row[5],
                tap=ratio,
                shift=row[9],
            )
        )

    gens, costs = _aggregate_generators(gens, costs)
    return Case(base_mva=base, buses=buses, gens=gens, branches=branches, costs=costs, ref_bus=ref)


def _aggregate_generators(gens, costs):
    """Merge co-located units: limits add, the cheapest polynomial is kept."""
    by_bus: dict[int, list[int]] = {}
    for i, g in enumerate(gens):
        by_bus.setdefault(g.bus, []).append(i)
    out_g, out_c = [], []
    for bus in sorted(by_bus, key=lambda b: min(by_bus[b])):
        idxs = by_bus[bus]
        if len(idxs) == 1:
            out_g.append(gens[idxs[0]])
            out_c.append(costs[idxs[0]])
            continue
        p_min = sum(gens[i].p_min for i in idxs)
        p_max = sum(gens[i].p_max for i in idxs)
        q_min = sum(gens[i].q_min for i in idxs)
        q_max = sum(gens[i].q_max for i in idxs)
        mid = 0.5 * (p_min + p_max)
        best = min(idxs, key=lambda i: (costs[i](mid), i))
        out_g.append(Generator(bus=bus, p_min=p_min, p_max=p_max, q_min=q_min, q_max=q_max))
        out_c.append(costs[best])
    return out_g, out_c


# native-json schema: one-to-one mirror of Case fields (loads/limits in
# MW/MVAr, impedances and voltage bounds in p.u.), documented in the README.


def _case_from_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    try:
        return Case(
            base_mva=doc["base_mva"],
            buses=[Bus(**b) for b in doc["buses"]],
            gens=[Generator(**g) for g in doc["gens"]],
            branches=[Branch(**br) for br in doc["branches"]],
            costs=[CostPoly(**c) for c in doc["costs"]],
            ref_bus=doc["ref_bus"],
            name=doc.get("name", ""),
        )
    except KeyError as exc:
        raise ParseError(f"missing field {exc}") from None
    except TypeError as exc:
        raise ParseError(str(exc)) from None


def parse_case(text: str, fmt: str = "m-file") -> Case:
    """Parse a case from m-file or native-json content."""
    if fmt == "m-file":
        return _case_from_mfile(text)
    if fmt == "native-json":
        return _case_from_json(text)
    raise ValueError(f"unknown case format {fmt!r}")


def emit_case(case: Case) -> str:
    """Serialize to the native-json format; parse_case inverts this exactly."""
    doc = {
        "base_mva": case.base_mva,
        "ref_bus": case.ref_bus,
        "name": case.name,
        "buses": [vars(b).copy() for b in case.buses],
        "gens": [vars(g).copy() for g in case.gens],
        "branches": [vars(br).copy() for br in case.branches],
        "costs": [vars(c).copy() for c in case.costs],
    }
    return json.dumps(doc, indent=1)


def load_case(path) -> Case:
    """Read a case file, inferring the format from the extension."""
    with open(path) as f:
        text = f.read()
    fmt = "native-json" if str(path).endswith(".json") else "m-file"
    case = parse_case(text, fmt)
    if not case.name:
        stem = re.sub(r"\.(m|json)$", "", str(path).rsplit("/", 1)[-1])
        case = replace(case, name=stem)
    return case
