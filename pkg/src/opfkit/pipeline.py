"""End-to-end experiments: non-convexity screening over random cases, and the
modified-IEEE challenge cases built by load reduction and limit tightening."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .casegen import GenerationParams, batch_seed, generate_case
from .localopt import multistart
from .netmodel import Case, CaseError, build_admittance
from .sdprelax import build_sdp, optimality_gap, solve_sdp

__all__ = [
    "ScreeningResult",
    "ModificationRecipe",
    "RECIPES",
    "screen_batch",
    "apply_recipe",
    "gap_table",
    "GapRow",
]


@dataclass
class ScreeningResult:
    case_id: str
    case: Case | None
    best_objective: float
    bound: float
    gap_percent: float
    selected: bool
    rank: int
    screened_ok: bool  # False when a solver failed; such cases are unscreened
    best_v: np.ndarray | None = None
    n_optima: int = 0


def screen_batch(params: GenerationParams, count: int, threshold: float, seed: int,
                 n_starts: int = 10, escalate_starts: int = 200,
                 keep_cases: bool = True) -> list[ScreeningResult]:
    """Generate, locally solve, bound, and select cases with gap >= threshold.

    Screening uses a light multistart; cases that clear the threshold are
    re-solved with ``escalate_starts`` initializations to firm up the best
    objective before the final gap is recorded.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    out: list[ScreeningResult] = []
    index = 0
    attempts = 0
    while len(out) < count:
        case_seed = batch_seed(seed, index)
        index += 1
        attempts += 1
        if attempts > 100 * count + 1000:
            raise RuntimeError("rejection rate too high")
        case = generate_case(params, case_seed)
        if case is None:
            continue
        case_id = case.name
        model = build_admittance(case)
        try:
            # relaxation first: an infeasibility certificate saves the whole
            # multistart on the many load-unservable draws
            sdp = solve_sdp(build_sdp(case, model))
            if sdp.status == "infeasible":
                out.append(ScreeningResult(case_id, case if keep_cases else None,
                                           float("nan"), float("nan"), float("nan"),
                                           False, 0, screened_ok=False))
                continue
            optima = multistart(case, n_starts=n_starts, seed=index, model=model)
        except (np.linalg.LinAlgError, CaseError):
            out.append(ScreeningResult(case_id, case if keep_cases else None,
                                       float("nan"), float("nan"), float("nan"),
                                       False, 0, screened_ok=False))
            continue
        if optima.best is None or sdp.status != "optimal":
            out.append(ScreeningResult(case_id, case if keep_cases else None,
                                       float("nan"), float("nan"), float("nan"),
                                       False, sdp.rank if sdp.status == "optimal" else 0,
                                       screened_ok=False))
            continue
        best = optima.best.objective
        best_v = optima.best.v
        n_opt = len(optima.points)
        gap = optimality_gap(best, sdp.bound).gap_percent
        if gap >= threshold and n_starts < escalate_starts:
            optima = multistart(case, n_starts=escalate_starts, seed=index, model=model)
            if optima.best is not None:
                best = optima.best.objective
                best_v = optima.best.v
                n_opt = len(optima.points)
                gap = optimality_gap(best, sdp.bound).gap_percent
        out.append(ScreeningResult(
            case_id=case_id,
            case=case if keep_cases else None,
            best_objective=best,
            bound=sdp.bound,
            gap_percent=gap,
            selected=gap >= threshold,
            rank=sdp.rank,
            screened_ok=True,
            best_v=best_v,
            n_optima=n_opt,
        ))
    return out


@dataclass(frozen=True)
class ModificationRecipe:
    """Percent changes: loads scale down, voltage bounds and the reactive
    lower limit tighten (all multiplicative, toward the feasible interior)."""

    d_pd: float
    d_qd: float
    d_v_upper: float
    d_v_lower: float
    d_qg: float

    def __post_init__(self):
        for v in (self.d_pd, self.d_qd, self.d_v_upper, self.d_v_lower, self.d_qg):
            if not 0.0 <= v <= 100.0:
                raise ValueError("recipe percentages must lie in [0, 100]")


RECIPES: dict[str, ModificationRecipe] = {
    "14": ModificationRecipe(60.00, 60.00, 0.06, 0.06, 95.00),
    "24": ModificationRecipe(55.00, 55.00, 0.73, 0.73, 90.00),
    "57": ModificationRecipe(72.00, 72.00, 0.06, 0.06, 95.00),
    "118": ModificationRecipe(71.00, 71.00, 0.06, 0.06, 95.00),
}


def apply_recipe(case: Case, recipe: ModificationRecipe) -> Case:
    """Scaled copy of the case; everything not named by the recipe is untouched."""
    buses = []
    for b in case.buses:
        v_max = b.v_max * (1.0 - recipe.d_v_upper / 100.0)
        v_min = b.v_min * (1.0 + recipe.d_v_lower / 100.0)
        if v_min > v_max:
            raise CaseError(f"recipe empties the voltage band at bus {b.id}")
        buses.append(replace(
            b,
            p_load=b.p_load * (1.0 - recipe.d_pd / 100.0),
            q_load=b.q_load * (1.0 - recipe.d_qd / 100.0),
            v_max=v_max,
            v_min=v_min,
        ))
    gens = []
    for g in case.gens:
        q_min = g.q_min * (1.0 - recipe.d_qg / 100.0)  # shrink toward zero
        if q_min > g.q_max:
            raise CaseError(f"recipe crosses Q limits at bus {g.bus}")
        gens.append(replace(g, q_min=q_min))
    return replace(case, buses=tuple(buses), gens=tuple(gens),
                   name=(case.name + "-mod") if case.name else "modified")


@dataclass
class GapRow:
    name: str
    worst: float
    best: float
    bound: float
    gap_percent: float
    n_optima: int
    rank: int
    failed: bool = False


def gap_table(cases: list[tuple[str, Case]], n_starts: int = 200, seed: int = 0) -> list[GapRow]:
    """Worst/best local optima, relaxation bound, and gap for each case."""
    rows = []
    for i, (name, case) in enumerate(cases):
        model = build_admittance(case)
        try:
            optima = multistart(case, n_starts=n_starts, seed=seed + i, model=model)
            sdp = solve_sdp(build_sdp(case, model))
        except np.linalg.LinAlgError:
            rows.append(GapRow(name, float("nan"), float("nan"), float("nan"),
                               float("nan"), 0, 0, failed=True))
            continue
        ok = optima.best is not None and sdp.status == "optimal"
        if not ok:
            rows.append(GapRow(name, float("nan"),
                               optima.best.objective if optima.best else float("nan"),
                               sdp.bound, float("nan"), len(optima.points), sdp.rank, failed=True))
            continue
        gap = optimality_gap(optima.best.objective, sdp.bound).gap_percent
        rows.append(GapRow(
            name=name,
            worst=optima.worst.objective,
            best=optima.best.objective,
            bound=sdp.bound,
            gap_percent=gap,
            n_optima=len(optima.points),
            rank=sdp.rank,
        ))
    return rows


def format_gap_table(rows: list[GapRow]) -> str:
    lines = [
        f"{'Case':<12} {'Worst ($/hr)':>14} {'Best ($/hr)':>14} {'Bound ($/hr)':>14} {'Gap':>8}  {'#opt':>4}",
    ]
    for r in rows:
        if r.failed:
            lines.append(f"{r.name:<12} {'--':>14} {'--':>14} {'--':>14} {'--':>8}  {r.n_optima:>4}")
        else:
            lines.append(
                f"{r.name:<12} {r.worst:>14.6g} {r.best:>14.6g} {r.bound:>14.6g} {r.gap_percent:>7.4g}%  {r.n_optima:>4}"
            )
    return "\n".join(lines)


def screening_report_json(results: list[ScreeningResult]) -> str:
    doc = []
    for r in results:
        doc.append({
            "case_id": r.case_id,
            "best_objective": None if np.isnan(r.best_objective) else r.best_objective,
            "bound": None if np.isnan(r.bound) else r.bound,
            "gap_percent": None if np.isnan(r.gap_percent) else r.gap_percent,
            "selected": bool(r.selected),
            "rank": int(r.rank),
            "screened_ok": bool(r.screened_ok),
            "n_optima": int(r.n_optima),
        })
    return json.dumps(doc, indent=1)


def screening_report_csv(results: list[ScreeningResult]) -> str:
    lines = ["case_id,best_objective,bound,gap_percent,selected,rank,screened_ok,n_optima"]
    for r in results:
        lines.append(
            f"{r.case_id},{r.best_objective:.10g},{r.bound:.10g},{r.gap_percent:.6g},"
            f"{int(r.selected)},{r.rank},{int(r.screened_ok)},{r.n_optima}"
        )
    return "\n".join(lines) + "\n"
