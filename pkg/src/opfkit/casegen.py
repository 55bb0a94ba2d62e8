"""Random construction of small OPF test cases.

Topology starts from a uniform random spanning tree (random-walk sampling) and
gains a uniform number of extra lines between random bus pairs.  Electrical
parameters come from per-family Gaussian distributions; cases that cannot
serve their load even at full output are rejected as trivially infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netmodel import Branch, Bus, Case, CostPoly, Generator

__all__ = [
    "GenerationParams",
    "random_spanning_tree",
    "generate_case",
    "generate_batch",
    "FAMILIES",
]


@dataclass(frozen=True)
class GaussSpec:
    mean: float
    std: float

    def draw(self, rng):
        return self.mean if self.std == 0.0 else float(rng.normal(self.mean, self.std))


@dataclass(frozen=True)
class GenerationParams:
    """Sampling distributions for one case family (per-unit on 100 MVA)."""

    n_buses: int
    r: GaussSpec
    x: GaussSpec
    b_sh: GaussSpec
    tap: GaussSpec
    shift: GaussSpec  # degrees
    p_gen_max: GaussSpec  # MW
    p_gen_min: GaussSpec
    q_gen_max: GaussSpec  # MVAr
    q_gen_min: GaussSpec
    p_load: GaussSpec  # MW
    q_load: GaussSpec
    v_min: float
    v_max: float
    transformer_prob: float = 0.08
    generator_prob: float = 0.30
    c2_range: tuple[float, float] = (0.05, 1.0)  # $/(MW h)^2
    c1_range: tuple[float, float] = (10.0, 70.0)  # $/(MW h)
    name: str = ""

    def __post_init__(self):
        for spec in (self.r, self.x, self.b_sh, self.tap, self.shift,
                     self.p_gen_max, self.p_gen_min, self.q_gen_max,
                     self.q_gen_min, self.p_load, self.q_load):
            if spec.std < 0.0:
                raise ValueError("standard deviations must be nonnegative")
        if not (0.0 <= self.transformer_prob <= 1.0 and 0.0 <= self.generator_prob <= 1.0):
            raise ValueError("probabilities must lie in [0, 1]")


def _family(name, n, vlim, **kw):
    return GenerationParams(n_buses=n, v_min=vlim[0], v_max=vlim[1], name=name, **kw)


FAMILIES: dict[str, GenerationParams] = {
    "4bus": _family(
        "4bus", 4, (0.90, 1.10),
        r=GaussSpec(0.37, 0.02), x=GaussSpec(0.38, 0.02), b_sh=GaussSpec(0.38, 0.02),
        tap=GaussSpec(0.0, 0.0), shift=GaussSpec(0.0, 0.0),
        p_gen_max=GaussSpec(24.0, 1.0), p_gen_min=GaussSpec(23.0, 1.0),
        q_gen_max=GaussSpec(57.0, 2.0), q_gen_min=GaussSpec(-54.0, 1.0),
        p_load=GaussSpec(23.0, 3.0), q_load=GaussSpec(16.0, 3.0),
        transformer_prob=0.0,  # the family's tap distribution is degenerate at zero
    ),
    "5bus": _family(
        "5bus", 5, (0.90, 1.10),
        r=GaussSpec(0.25, 0.01), x=GaussSpec(0.44, 0.01), b_sh=GaussSpec(0.22, 0.02),
        tap=GaussSpec(1.0, 0.01), shift=GaussSpec(0.0, 3.0),
        p_gen_max=GaussSpec(5000.0, 5.0), p_gen_min=GaussSpec(100.0, 2.0),
        q_gen_max=GaussSpec(1800.0, 5.0), q_gen_min=GaussSpec(-30.0, 1.0),
        p_load=GaussSpec(95.0, 5.0), q_load=GaussSpec(14.0, 1.0),
    ),
    "3bus-acyclic": _family(
        "3bus-acyclic", 3, (0.81, 1.21),
        r=GaussSpec(0.40, 0.05), x=GaussSpec(0.44, 0.01), b_sh=GaussSpec(0.45, 0.01),
        tap=GaussSpec(1.0, 0.0), shift=GaussSpec(0.0, 0.0),
        p_gen_max=GaussSpec(220.0, 2.0), p_gen_min=GaussSpec(0.0, 0.0),
        q_gen_max=GaussSpec(110.0, 2.0), q_gen_min=GaussSpec(-26.0, 1.0),
        p_load=GaussSpec(30.0, 5.0), q_load=GaussSpec(10.0, 1.0),
    ),
    "3bus-cyclic": _family(
        "3bus-cyclic", 3, (0.90, 1.10),
        r=GaussSpec(0.43, 0.02), x=GaussSpec(0.46, 0.01), b_sh=GaussSpec(0.43, 0.01),
        tap=GaussSpec(1.0, 0.0), shift=GaussSpec(0.0, 0.0),
        p_gen_max=GaussSpec(200.0, 1.0), p_gen_min=GaussSpec(0.0, 0.0),
        q_gen_max=GaussSpec(100.0, 2.0), q_gen_min=GaussSpec(-25.0, 1.0),
        p_load=GaussSpec(39.0, 0.0), q_load=GaussSpec(20.0, 1.0),
    ),
}


def random_spanning_tree(n: int, seed_or_rng) -> list[tuple[int, int]]:
    """Uniform random spanning tree over buses 1..n by the random-walk method.

    Walk the complete graph from a random start; the first-entrance edge of
    each vertex joins the tree, which makes every labeled tree equally likely.
    """
    if n < 2:
        raise ValueError("need at least two buses")
    rng = seed_or_rng if isinstance(seed_or_rng, np.random.Generator) else np.random.default_rng(seed_or_rng)
    current = int(rng.integers(n))
    visited = {current}
    edges = []
    while len(visited) < n:
        # uniform neighbor on K_n, excluding self
        step = int(rng.integers(n - 1))
        nxt = step if step < current else step + 1
        if nxt not in visited:
            edges.append((current + 1, nxt + 1))
            visited.add(nxt)
        current = nxt
    return edges


def _sample_structure(params: GenerationParams, rng):
    """Topology plus raw transformer/generator indicator draws."""
    n = params.n_buses
    edges = random_spanning_tree(n, rng)
    max_extra = n * (n - 1) // 2 - (n - 1)
    extra = int(rng.integers(0, max_extra + 1))
    for _ in range(extra):
        a = int(rng.integers(1, n + 1))
        b = int(rng.integers(1, n))
        b = b if b < a else b + 1
        edges.append((a, b))
    is_transformer = rng.random(len(edges)) < params.transformer_prob
    is_gen = rng.random(n) < params.generator_prob
    return edges, is_transformer, is_gen


def generate_case(params: GenerationParams, seed) -> Case | None:
    """One random case, or None when rejected by the capacity prescreen."""
    rng = np.random.default_rng(seed)
    n = params.n_buses
    edges, is_transformer, is_gen = _sample_structure(params, rng)

    branches = []
    for (a, b), xf in zip(edges, is_transformer):
        r = max(params.r.draw(rng), 0.0)  # negative resistances clamp to zero
        x = params.x.draw(rng)
        bsh = params.b_sh.draw(rng)
        if xf:
            tap = params.tap.draw(rng)
            if tap <= 0.0:
                tap = 0.9
            shift = params.shift.draw(rng)
        else:
            tap, shift = 1.0, 0.0
        branches.append(Branch(from_bus=a, to_bus=b, r=r, x=x, b_sh=bsh, tap=tap, shift=shift))

    gen_buses = [k + 1 for k in range(n) if is_gen[k]]
    if not gen_buses:
        gen_buses = [int(rng.integers(1, n + 1))]
    ref = gen_buses[0]

    gens, costs = [], []
    for bus in gen_buses:
        p_max = params.p_gen_max.draw(rng)
        p_min = min(params.p_gen_min.draw(rng), p_max)
        q_max = params.q_gen_max.draw(rng)
        q_min = params.q_gen_min.draw(rng)
        for _ in range(10):
            if q_min <= q_max:
                break
            q_min = params.q_gen_min.draw(rng)
        q_min = min(q_min, q_max)
        gens.append(Generator(bus=bus, p_min=p_min, p_max=p_max, q_min=q_min, q_max=q_max))
        costs.append(CostPoly(
            c2=float(rng.uniform(*params.c2_range)),
            c1=float(rng.uniform(*params.c1_range)),
            c0=0.0,
        ))

    buses = []
    for k in range(n):
        buses.append(Bus(
            id=k + 1,
            p_load=params.p_load.draw(rng),
            q_load=params.q_load.draw(rng),
            v_min=params.v_min,
            v_max=params.v_max,
        ))

    if sum(g.p_max for g in gens) < sum(b.p_load for b in buses):
        return None  # trivially infeasible
    return Case(
        base_mva=100.0,
        buses=buses,
        gens=gens,
        branches=branches,
        costs=costs,
        ref_bus=ref,
        name=f"{params.name or 'random'}-{seed}",
    )


def batch_seed(seed: int, index: int):
    """Derived child seed for batch index; stable across thread counts."""
    return np.random.SeedSequence(entropy=seed, spawn_key=(index,))


def generate_batch(params: GenerationParams, count: int, seed: int):
    """``count`` accepted cases with per-index derived seeds.

    Returns (cases, attempts); rejected draws advance the index so results are
    reproducible regardless of how work is divided.
    """
    cases = []
    attempts = 0
    index = 0
    while len(cases) < count:
        case = generate_case(params, batch_seed(seed, index))
        index += 1
        attempts += 1
        if case is not None:
            cases.append(case)
        if attempts > 100 * count + 1000:
            raise RuntimeError("rejection rate too high; check parameters")
    return cases, attempts
