import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opfkit.netmodel import (
    Branch,
    Bus,
    Case,
    CaseError,
    CostPoly,
    Generator,
    ParseError,
    build_admittance,
    check_feasibility,
    emit_case,
    evaluate_point,
    parse_case,
)
from conftest import data_path
from oracles import dense_h_matrix, dense_htilde_matrix

MINIMAL_MFILE = """
function mpc = tiny
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0 0 0 1 1 0 0 1 1.1 0.9;
    2 1 10 5 0 0 1 1 0 0 1 1.1 0.9;
];
mpc.gen = [
    1 0 0 50 -50 1 100 1 100 0;
];
mpc.branch = [
    1 2 0.01 0.1 0 0 0 0 0 0 1 -360 360;
];
mpc.gencost = [
    2 0 0 3 0.1 10 1;
];
"""


class TestParse:
    def test_minimal_two_bus(self):
        case = parse_case(MINIMAL_MFILE, "m-file")
        assert case.n == 2 and len(case.branches) == 1
        br = case.branches[0]
        assert br.r == 0.01 and br.x == 0.1 and br.tap == 1.0
        assert case.buses[1].p_load == 10 and case.ref_bus == 1
        assert case.costs[0].c0 == 1.0

    def test_json_round_trip(self, case3):
        text = emit_case(case3)
        again = parse_case(text, "native-json")
        assert emit_case(again) == text

    def test_ieee14_counts(self, ieee14):
        assert ieee14.n == 14
        assert len(ieee14.gens) == 5
        assert len(ieee14.branches) == 20

    def test_dropped_gen_status(self):
        text = MINIMAL_MFILE.replace("1 0 0 50 -50 1 100 1 100 0;",
                                     "1 0 0 50 -50 1 100 1 100 0;\n 2 0 0 10 -10 1 100 0 50 0;")
        text = text.replace("2 0 0 3 0.1 10 1;", "2 0 0 3 0.1 10 1;\n 2 0 0 3 0.1 10 1;")
        case = parse_case(text, "m-file")
        assert len(case.gens) == 1

    def test_duplicate_bus_id(self):
        bad = MINIMAL_MFILE.replace("2 1 10 5", "1 1 10 5")
        with pytest.raises(ParseError, match="duplicate bus id"):
            parse_case(bad, "m-file")

    def test_missing_matrix(self):
        bad = MINIMAL_MFILE.replace("mpc.gencost", "mpc.ignored")
        with pytest.raises(ParseError, match="gencost"):
            parse_case(bad, "m-file")

    def test_syntax_error_reports_line(self):
        bad = MINIMAL_MFILE.replace("1 2 0.01 0.1 0", "1 2 0.01 oops 0")
        with pytest.raises(ParseError, match="line"):
            parse_case(bad, "m-file")

    def test_ratio_zero_read_as_one(self, ieee14):
        taps = [br.tap for br in ieee14.branches]
        assert max(taps) <= 1.0 and min(taps) == pytest.approx(0.932)
        assert sum(1 for t in taps if t != 1.0) == 3

    def test_aggregation_sums_limits(self, ieee24):
        g1 = ieee24.gens[ieee24.gen_bus_index[1]]
        # four units: 2x20 + 2x76 MW
        assert g1.p_max == pytest.approx(192.0)
        assert g1.p_min == pytest.approx(62.4)

    def test_invariants_rejected(self):
        with pytest.raises(CaseError):
            Bus(id=1, v_min=0.0)
        with pytest.raises(CaseError):
            Branch(from_bus=1, to_bus=2, r=0.0, x=0.0)
        with pytest.raises(CaseError):
            Branch(from_bus=1, to_bus=1, r=0.1, x=0.1)
        with pytest.raises(CaseError):
            Generator(bus=1, p_min=1.0, p_max=0.0, q_min=0, q_max=0)
        with pytest.raises(CaseError):
            CostPoly(-1.0, 0.0, 0.0)


class TestAdmittance:
    def test_single_line_y(self, case2_zero_load):
        model = build_admittance(case2_zero_load)
        y = 1.0 / complex(0.01, 0.1)
        want = np.array([[y, -y], [-y, y]])
        assert np.allclose(model.y_bus, want, atol=1e-12)
        assert abs(y - complex(0.990099, -9.900990)) < 1e-6

    def test_h_matches_dense_oracle(self, case3):
        model = build_admittance(case3)
        for k in range(case3.n):
            assert np.allclose(model.h(k), dense_h_matrix(model.y_bus, k), atol=1e-14)
            assert np.allclose(model.h_tilde(k), dense_htilde_matrix(model.y_bus, k), atol=1e-14)

    def test_hermitian(self, case3, ieee14):
        for case in (case3, ieee14):
            model = build_admittance(case)
            for k in range(case.n):
                for m in (model.h(k), model.h_tilde(k)):
                    assert np.max(np.abs(m - m.conj().T)) < 1e-12

    def test_structural_symmetry_without_tap(self, case2):
        model = build_admittance(case2)
        assert np.allclose(model.y_bus, model.y_bus.T)

    def test_flow_identity_vs_branch_currents(self, case3):
        model = build_admittance(case3)
        rng = np.random.default_rng(0)
        v = rng.normal(1.0, 0.1, case3.n) * np.exp(1j * rng.normal(0, 0.3, case3.n))
        w = np.outer(v, v.conj())
        s_fwd, s_rev = model.branch_flows(v)
        for bi in range(len(case3.branches)):
            f, g = model.f_fwd(bi), model.f_rev(bi)
            assert np.trace((f + f.conj().T) @ w).real == pytest.approx(2 * s_fwd[bi].real, abs=1e-10)
            assert np.trace(1j * (f.conj().T - f) @ w).real == pytest.approx(2 * s_fwd[bi].imag, abs=1e-10)
            assert np.trace((g + g.conj().T) @ w).real == pytest.approx(2 * s_rev[bi].real, abs=1e-10)

    def test_trace_vs_direct_injections(self, case3):
        """Two-formulation equivalence over many random voltage vectors."""
        model = build_admittance(case3)
        rng = np.random.default_rng(1)
        for _ in range(1000):
            v = rng.normal(0, 1, case3.n) + 1j * rng.normal(0, 1, case3.n)
            w = np.outer(v, v.conj())
            s = model.injections(v)
            for k in range(case3.n):
                p = np.trace(model.h(k) @ w).real
                q = np.trace(model.h_tilde(k) @ w).real
                scale = max(1.0, abs(s[k]))
                assert abs(p - s[k].real) / scale < 1e-9
                assert abs(q - s[k].imag) / scale < 1e-9

    def test_passivity(self, case3):
        # no shunt conductance, r >= 0: total active losses nonnegative
        model = build_admittance(case3)
        rng = np.random.default_rng(2)
        for _ in range(200):
            v = rng.normal(0, 1, case3.n) + 1j * rng.normal(0, 1, case3.n)
            assert model.injections(v).real.sum() >= -1e-11


class TestEvaluate:
    def test_zero_voltage(self, case3):
        model = build_admittance(case3)
        ev = evaluate_point(case3, model, np.zeros(3, dtype=complex))
        assert np.allclose(ev.p_inj, 0) and np.allclose(ev.q_inj, 0)
        assert np.allclose(ev.sq_flow_fwd, 0)
        want = sum(c(b.p_load) for c, b in zip(case3.costs, (case3.buses[0], case3.buses[2])))
        assert ev.objective == pytest.approx(want)

    def test_flat_lossless(self):
        case = Case(
            base_mva=100.0,
            buses=[Bus(id=1), Bus(id=2)],
            gens=[Generator(bus=1, p_min=0, p_max=100, q_min=-100, q_max=100)],
            branches=[Branch(from_bus=1, to_bus=2, r=0.0, x=0.1)],
            costs=[CostPoly(0.0, 1.0, 0.0)],
            ref_bus=1,
        )
        ev = evaluate_point(case, build_admittance(case), np.ones(2, dtype=complex))
        assert np.allclose(ev.p_inj, 0, atol=1e-14)
        assert np.allclose(ev.q_inj, 0, atol=1e-14)

    def test_random_v_matches_classical_formula(self, case2):
        model = build_admittance(case2)
        rng = np.random.default_rng(3)
        v = rng.normal(1, 0.2, 2) + 1j * rng.normal(0, 0.2, 2)
        ev = evaluate_point(case2, model, v)
        s = v * np.conj(model.y_bus @ v)
        assert np.allclose(ev.p_inj + 1j * ev.q_inj, s, atol=1e-10)


class TestFeasibility:
    def test_binding_at_lower_limit(self, case2):
        v = np.array([0.9, 0.95 * np.exp(-0.05j)])
        rep = check_feasibility(case2, v)
        entries = {(e.kind, e.location): e for e in rep.entries}
        assert entries[("V-lower", 1)].status == "binding"

    def test_violated_below_lower_limit(self, case2):
        v = np.array([0.89, 1.0])
        rep = check_feasibility(case2, v)
        e = {(e.kind, e.location): e for e in rep.entries}[("V-lower", 1)]
        assert e.status == "violated"
        assert e.slack == pytest.approx(-0.01)

    def test_feasible_iff_no_violations(self, case3):
        from opfkit.localopt import solve_local

        pt = solve_local(case3)
        assert pt.status == "local-optimum"
        rep = check_feasibility(case3, pt.v)
        assert rep.is_feasible
        assert rep.min_slack_pu(case3.base_mva) > -1e-6

    def test_degenerate_rows_excluded_from_labels(self, case3):
        from opfkit.localopt import solve_local

        pt = solve_local(case3)
        labels = pt.binding.binding_labels()
        # load-bus balance rows are equalities, never engineering labels
        assert not any(lbl.endswith("@2") and lbl[0] in "PQ" for lbl in labels)


@settings(max_examples=50, deadline=None)
@given(
    r=st.floats(0.001, 0.5),
    x=st.floats(0.01, 0.5),
    b=st.floats(0.0, 0.5),
    tap=st.floats(0.9, 1.1),
    shift=st.floats(-10.0, 10.0),
)
def test_admittance_hermitian_property(r, x, b, tap, shift):
    case = Case(
        base_mva=100.0,
        buses=[Bus(id=1), Bus(id=2)],
        gens=[Generator(bus=1, p_min=0, p_max=10, q_min=-10, q_max=10)],
        branches=[Branch(from_bus=1, to_bus=2, r=r, x=x, b_sh=b, tap=tap, shift=shift)],
        costs=[CostPoly(0.0, 1.0, 0.0)],
        ref_bus=1,
    )
    model = build_admittance(case)
    for k in range(2):
        for m in (model.h(k), model.h_tilde(k)):
            assert np.max(np.abs(m - m.conj().T)) < 1e-12
