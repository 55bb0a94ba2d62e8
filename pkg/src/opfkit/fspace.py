"""Discretized feasible-space computation, projection, and connectivity.

Each grid point over the control degrees of freedom (generator voltage
setpoints, non-slack generator dispatches) defines a power flow problem; all
of its solutions are enumerated and screened against the operating limits.
The surviving points form a reliable picture of the feasible space, which can
be projected onto dispatch/voltage axes and split into connected components.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import re
from dataclasses import dataclass

import numpy as np

from .netmodel import AdmittanceModel, Case, build_admittance, check_feasibility, evaluate_point
from . import pflow
from .casegen import batch_seed

__all__ = [
    "GridAxis",
    "GridSpec",
    "FeasiblePoint",
    "ProjectionDataset",
    "default_grid",
    "map_feasible_space",
    "project",
    "connectivity",
    "default_radius",
    "to_csv",
    "to_json",
]

VSET, PSET = "vset", "pset"


@dataclass(frozen=True)
class GridAxis:
    kind: str  # vset | pset
    bus: int  # bus id
    lo: float
    hi: float
    points: int

    def values(self):
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class GridSpec:
    axes: tuple[GridAxis, ...]

    def __post_init__(self):
        for ax in self.axes:
            if ax.points < 2:
                raise ValueError("each axis needs at least two points")
            if ax.kind not in (VSET, PSET):
                raise ValueError(f"unknown axis kind {ax.kind!r}")

    @property
    def shape(self):
        return tuple(ax.points for ax in self.axes)

    def validate_against(self, case: Case):
        for ax in self.axes:
            if ax.bus not in case.gen_bus_index:
                raise ValueError(f"axis bus {ax.bus} has no generator")
            g = case.gens[case.gen_bus_index[ax.bus]]
            b = case.buses[case.bus_index[ax.bus]]
            if ax.kind == VSET and not (b.v_min - 1e-9 <= ax.lo and ax.hi <= b.v_max + 1e-9):
                raise ValueError(f"voltage axis at bus {ax.bus} exceeds the case limits")
            if ax.kind == PSET:
                if ax.bus == case.ref_bus:
                    raise ValueError("slack generator dispatch is never a grid axis")
                if not (g.p_min - 1e-9 <= ax.lo and ax.hi <= g.p_max + 1e-9):
                    raise ValueError(f"dispatch axis at bus {ax.bus} exceeds the case limits")


def default_grid(case: Case, points: int = 25) -> GridSpec:
    """One voltage axis per generator bus, one dispatch axis per non-slack
    generator, each spanning the case limits."""
    axes = []
    for g in case.gens:
        b = case.buses[case.bus_index[g.bus]]
        axes.append(GridAxis(VSET, g.bus, b.v_min, b.v_max, points))
    for g in case.gens:
        if g.bus != case.ref_bus and g.p_max - g.p_min > 1e-12:
            axes.append(GridAxis(PSET, g.bus, g.p_min, g.p_max, points))
    return GridSpec(axes=tuple(axes))


@dataclass
class FeasiblePoint:
    v: np.ndarray  # complex, full length
    p_gen: np.ndarray  # MW, case.gens order
    q_gen: np.ndarray  # MVAr
    objective: float
    binding: list[str]
    grid_index: tuple[int, ...]
    coords: tuple[float, ...]  # grid axis values
    component: int = 0


@dataclass
class MapResult:
    points: list[FeasiblePoint]
    n_grid: int
    n_solutions: int
    n_failures: int  # grid points whose enumeration was not certified

    @property
    def certified(self):
        return self.n_failures == 0


def map_feasible_space(case: Case, grid: GridSpec, seed: int = 0,
                       model: AdmittanceModel | None = None) -> MapResult:
    """Enumerate every power-flow solution on the grid and keep the feasible ones."""
    grid.validate_against(case)
    if model is None:
        model = build_admittance(case)
    points: list[FeasiblePoint] = []
    n_sol = n_fail = 0
    axis_values = [ax.values() for ax in grid.axes]
    for flat_idx, combo in enumerate(itertools.product(*(range(ax.points) for ax in grid.axes))):
        v_set = {}
        p_set = {}
        for ax, ival, vals in zip(grid.axes, combo, axis_values):
            if ax.kind == VSET:
                v_set[ax.bus] = float(vals[ival])
            else:
                p_set[ax.bus] = float(vals[ival])
        spec = pflow.spec_from_setpoints(case, v_set, p_set)
        sys_ = pflow.build_system(case, model, spec)
        sols = pflow.enumerate_solutions(sys_, gamma_seed=batch_seed(seed, flat_idx))
        if not sols.certified:
            n_fail += 1
        n_sol += len(sols)
        coords = tuple(float(axis_values[a][i]) for a, i in enumerate(combo))
        for v in sols.solutions:
            report = check_feasibility(case, v, model)
            if not report.is_feasible:
                continue
            ev = evaluate_point(case, model, v)
            points.append(FeasiblePoint(
                v=v,
                p_gen=ev.p_gen,
                q_gen=ev.q_gen,
                objective=ev.objective,
                binding=report.binding_labels(),
                grid_index=combo,
                coords=coords,
            ))
    return MapResult(points=points, n_grid=int(np.prod(grid.shape)), n_solutions=n_sol, n_failures=n_fail)


_AXIS_RE = re.compile(r"^(pg|qg|vm)_?(\d+)$")


@dataclass
class ProjectionDataset:
    axes: tuple[str, ...]
    coords: np.ndarray  # (n_points, n_axes)
    cost: np.ndarray
    binding: list[list[str]]
    component: np.ndarray

    def __len__(self):
        return len(self.cost)


def _axis_value(case, pt: FeasiblePoint, axis: str):
    m = _AXIS_RE.match(axis)
    if not m:
        raise ValueError(f"unknown axis id {axis!r}")
    kind, bus = m.group(1), int(m.group(2))
    if kind == "vm":
        return float(np.abs(pt.v[case.bus_index[bus]]))
    gi = case.gen_bus_index.get(bus)
    if gi is None:
        raise ValueError(f"axis {axis!r}: no generator at bus {bus}")
    return float(pt.p_gen[gi] if kind == "pg" else pt.q_gen[gi])


def project(case: Case, points: list[FeasiblePoint], axes) -> ProjectionDataset:
    """Extract projection coordinates; no filtering.

    Axis ids look like ``pg2``, ``qg3``, ``vm1`` (generator P/Q by bus,
    voltage magnitude by bus).
    """
    axes = tuple(axes)
    if not 2 <= len(axes) <= 3:
        raise ValueError("projections use 2 or 3 axes")
    coords = np.array([[_axis_value(case, p, a) for a in axes] for p in points]).reshape(len(points), len(axes))
    return ProjectionDataset(
        axes=axes,
        coords=coords,
        cost=np.array([p.objective for p in points]),
        binding=[p.binding for p in points],
        component=np.array([p.component for p in points], dtype=int),
    )


def connectivity(coords: np.ndarray, radius: float) -> np.ndarray:
    """Single-linkage component labels (1..K, by decreasing size).

    Two points are adjacent iff their Euclidean distance is at most radius.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    n = len(coords)
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    coords = np.asarray(coords, dtype=float)
    for i in range(n):
        d = np.linalg.norm(coords[i + 1 :] - coords[i], axis=1)
        for j in np.flatnonzero(d <= radius):
            ri, rj = find(i), find(i + 1 + j)
            if ri != rj:
                parent[rj] = ri
    roots = np.array([find(i) for i in range(n)])
    order = {}
    sizes = {r: int(np.sum(roots == r)) for r in set(roots.tolist())}
    for rank, r in enumerate(sorted(sizes, key=lambda r: (-sizes[r], r)), start=1):
        order[r] = rank
    return np.array([order[r] for r in roots], dtype=int)


def label_components(dataset: ProjectionDataset, points: list[FeasiblePoint], radius: float | None = None):
    """Fill component ids on both the dataset and the points, in projection space."""
    if radius is None:
        radius = default_radius(dataset.coords)
    labels = connectivity(dataset.coords, radius)
    dataset.component = labels
    for p, lab in zip(points, labels):
        p.component = int(lab)
    return labels


def default_radius(coords: np.ndarray) -> float:
    """Twice the largest nearest-neighbor spacing in projection coordinates."""
    n = len(coords)
    if n < 2:
        return 1.0
    worst = 0.0
    for i in range(n):
        d = np.linalg.norm(coords - coords[i], axis=1)
        d[i] = np.inf
        worst = max(worst, float(d.min()))
    return 2.0 * worst


def to_csv(case: Case, points: list[FeasiblePoint]) -> str:
    """One row per feasible point: vm per bus, pg/qg per generator bus, cost,
    binding labels (semicolon-joined), component id."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = [f"vm_{b.id}" for b in case.buses]
    header += [f"pg_{g.bus}" for g in case.gens]
    header += [f"qg_{g.bus}" for g in case.gens]
    header += ["cost", "binding", "component"]
    writer.writerow(header)
    for p in points:
        row = [f"{abs(x):.12g}" for x in p.v]
        row += [f"{x:.12g}" for x in p.p_gen]
        row += [f"{x:.12g}" for x in p.q_gen]
        row += [f"{p.objective:.12g}", ";".join(p.binding), str(p.component)]
        writer.writerow(row)
    return buf.getvalue()


def to_json(case: Case, result: MapResult) -> str:
    doc = {
        "certified": result.certified,
        "n_grid": result.n_grid,
        "n_solutions": result.n_solutions,
        "n_failures": result.n_failures,
        "points": [
            {
                "vm": [float(abs(x)) for x in p.v],
                "va_deg": [float(np.degrees(np.angle(x))) for x in p.v],
                "pg": p.p_gen.tolist(),
                "qg": p.q_gen.tolist(),
                "cost": p.objective,
                "binding": p.binding,
                "component": p.component,
                "grid_index": list(p.grid_index),
                "coords": list(p.coords),
            }
            for p in result.points
        ],
    }
    return json.dumps(doc, indent=1)
