import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from opfkit.netmodel import Branch, Bus, Case, CostPoly, Generator, load_case

DATA = os.path.join(os.path.dirname(__file__), "data")

np.seterr(all="ignore")


def data_path(name):
    return os.path.join(DATA, name)


@pytest.fixture(scope="session")
def case2():
    """Slack + one PQ load bus over a single line."""
    return Case(
        base_mva=100.0,
        buses=[Bus(id=1), Bus(id=2, p_load=50.0, q_load=20.0)],
        gens=[Generator(bus=1, p_min=0, p_max=200, q_min=-100, q_max=100)],
        branches=[Branch(from_bus=1, to_bus=2, r=0.01, x=0.1)],
        costs=[CostPoly(0.2, 15.0, 0.0)],
        ref_bus=1,
    )


@pytest.fixture(scope="session")
def case2_zero_load():
    return Case(
        base_mva=100.0,
        buses=[Bus(id=1), Bus(id=2)],
        gens=[Generator(bus=1, p_min=0, p_max=100, q_min=-100, q_max=100)],
        branches=[Branch(from_bus=1, to_bus=2, r=0.01, x=0.1)],
        costs=[CostPoly(1.0, 10.0, 5.0)],
        ref_bus=1,
    )


@pytest.fixture(scope="session")
def case3():
    """Two generators, a transformer, one flow limit: exercises everything."""
    return Case(
        base_mva=100.0,
        buses=[
            Bus(id=1, p_load=10, q_load=5),
            Bus(id=2, p_load=50, q_load=20),
            Bus(id=3, p_load=30, q_load=10),
        ],
        gens=[
            Generator(bus=1, p_min=0, p_max=200, q_min=-100, q_max=100),
            Generator(bus=3, p_min=0, p_max=150, q_min=-80, q_max=80),
        ],
        branches=[
            Branch(from_bus=1, to_bus=2, r=0.02, x=0.2, b_sh=0.3, s_max=80),
            Branch(from_bus=2, to_bus=3, r=0.05, x=0.3, b_sh=0.4, tap=0.98, shift=2.0),
        ],
        costs=[CostPoly(0.5, 20, 0), CostPoly(0.3, 30, 0)],
        ref_bus=1,
    )


@pytest.fixture(scope="session")
def ieee14():
    return load_case(data_path("case14.m"))


@pytest.fixture(scope="session")
def ieee57():
    return load_case(data_path("case57.m"))


@pytest.fixture(scope="session")
def ieee118():
    return load_case(data_path("case118.m"))


@pytest.fixture(scope="session")
def ieee24():
    return load_case(data_path("case24_ieee_rts.m"))
