import numpy as np
import pytest
from dataclasses import replace

from opfkit.netmodel import Branch, Bus, Case, CostPoly, Generator, build_admittance, check_feasibility
from opfkit.localopt import solve_local
from opfkit.sdprelax import (
    GapReport,
    build_sdp,
    optimality_gap,
    rank_and_recovery,
    solve_sdp,
    to_sdpa,
    _BlockOps,
)


class TestBuild:
    def test_pure_linear_structure(self):
        case = Case(
            base_mva=100.0,
            buses=[Bus(id=1), Bus(id=2, p_load=10, q_load=2)],
            gens=[Generator(bus=1, p_min=0, p_max=100, q_min=-50, q_max=50)],
            branches=[Branch(from_bus=1, to_bus=2, r=0.01, x=0.1)],
            costs=[CostPoly(0.0, 12.0, 3.0)],
            ref_bus=1,
        )
        prob = build_sdp(case)
        assert prob.small_dims == []  # no epigraph, no arrow blocks
        assert prob.w_dim == 4

    def test_block_dimension(self, case3):
        prob = build_sdp(case3)
        assert prob.w_dim == 2 * case3.n
        assert prob.small_kinds.count("cost") == 2
        assert prob.small_kinds.count("arrow") == 2  # one limited branch, two ends

    def test_row_values_at_lifted_point(self, case3):
        from opfkit.netmodel import evaluate_point

        model = build_admittance(case3)
        prob = build_sdp(case3, model)
        ops = _BlockOps(prob)
        rng = np.random.default_rng(0)
        v = rng.normal(1, 0.05, 3) * np.exp(1j * rng.normal(0, 0.1, 3))
        w = np.outer(v, v.conj())
        x = np.block([[w.real, -w.imag], [w.imag, w.real]])
        vals = ops.apply_a(x, [np.zeros((d, d)) for d in prob.small_dims], np.zeros(prob.lp_dim))
        ev = evaluate_point(case3, model, v)
        labels = {c.label: i for i, c in enumerate(prob.cons)}
        for k in range(3):
            i = labels.get(f"P{k}<", labels.get(f"P{k}="))
            assert vals[i] / ops.row_scale[i] == pytest.approx(ev.p_inj[k], abs=1e-10)

    def test_rank1_exact_on_benign_case(self, case2):
        sol = solve_sdp(build_sdp(case2))
        pt = solve_local(case2)
        assert sol.status == "optimal" and sol.rank == 1
        assert sol.bound == pytest.approx(pt.objective, rel=1e-6)
        assert check_feasibility(case2, sol.recovered_v).is_feasible


class TestSolve:
    def test_infeasible_capacity(self):
        case = Case(
            base_mva=100.0,
            buses=[Bus(id=1, p_load=10), Bus(id=2, p_load=500)],
            gens=[Generator(bus=1, p_min=0, p_max=100, q_min=-100, q_max=100)],
            branches=[Branch(from_bus=1, to_bus=2, r=0.01, x=0.1)],
            costs=[CostPoly(0.1, 10, 0)],
            ref_bus=1,
        )
        sol = solve_sdp(build_sdp(case))
        assert sol.status == "infeasible"

    def test_gap_below_tolerance(self, case3):
        sol = solve_sdp(build_sdp(case3))
        assert sol.status == "optimal"
        assert sol.gap < 1e-7

    def test_weak_duality(self, case3, case2):
        for case in (case2, case3):
            pt = solve_local(case)
            sol = solve_sdp(build_sdp(case))
            assert sol.bound <= pt.objective + 1e-6 * abs(pt.objective)

    def test_embedding_eigenvalue_pairing(self, case3):
        sol = solve_sdp(build_sdp(case3))
        xw = sol.x_blocks[0]
        emb_eigs = np.sort(np.linalg.eigvalsh(xw))[::-1]
        w_eigs = sol.eigenvalues
        # eigenvalues of the embedding occur in pairs matching those of W
        assert np.allclose(emb_eigs[0::2], w_eigs, atol=1e-6)
        assert np.allclose(emb_eigs[1::2], w_eigs, atol=1e-6)
        assert np.max(np.abs(sol.w - sol.w.conj().T)) < 1e-9

    def test_objective_scaling(self, case2):
        alpha = 7.5
        base = solve_sdp(build_sdp(case2))
        scaled_case = replace(case2, costs=tuple(CostPoly(c.c2 * alpha, c.c1 * alpha, c.c0 * alpha) for c in case2.costs))
        scaled = solve_sdp(build_sdp(scaled_case))
        assert scaled.bound == pytest.approx(alpha * base.bound, rel=1e-6)

    def test_against_cvxpy_oracle(self, case3):
        cp = pytest.importorskip("cvxpy")
        model = build_admittance(case3)
        n, base = case3.n, case3.base_mva
        w = cp.Variable((n, n), hermitian=True)
        cons = [w >> 0]
        p_lo, p_hi = case3.p_limits_pu()
        q_lo, q_hi = case3.q_limits_pu()
        obj = 0
        for k in range(n):
            pk = cp.real(cp.trace(model.h(k) @ w))
            qk = cp.real(cp.trace(model.h_tilde(k) @ w))
            cons += [pk >= p_lo[k], pk <= p_hi[k], qk >= q_lo[k], qk <= q_hi[k]]
            cons += [cp.real(w[k, k]) >= case3.buses[k].v_min ** 2,
                     cp.real(w[k, k]) <= case3.buses[k].v_max ** 2]
        for bi, br in enumerate(case3.branches):
            if br.s_max > 0:
                for fmat in (model.f_fwd(bi), model.f_rev(bi)):
                    p = cp.real(cp.trace((fmat + fmat.conj().T) @ w)) / 2
                    q = cp.real(cp.trace(1j * (fmat.conj().T - fmat) @ w)) / 2
                    cons.append(cp.norm(cp.hstack([p, q])) <= br.s_max / base)
        for gi, g in enumerate(case3.gens):
            k = case3.bus_index[g.bus]
            pg = cp.real(cp.trace(model.h(k) @ w)) * base + case3.buses[k].p_load
            c = case3.costs[gi]
            obj = obj + c.c2 * cp.square(pg) + c.c1 * pg + c.c0
        problem = cp.Problem(cp.Minimize(obj), cons)
        problem.solve(solver=cp.SCS, eps=1e-8, max_iters=200000)
        mine = solve_sdp(build_sdp(case3))
        assert mine.bound == pytest.approx(problem.value, rel=1e-5)


class TestRankRecovery:
    def test_exact_rank_one_matrix(self, case2):
        sol = solve_sdp(build_sdp(case2))
        rank, v = rank_and_recovery(sol)
        assert rank == 1
        w = np.outer(v, v.conj())
        assert np.allclose(w, sol.w, atol=1e-6)
        assert np.angle(v[case2.ref_index]) == pytest.approx(0.0, abs=1e-9)

    def test_rank_two_no_recovery(self):
        from opfkit.sdprelax import SdpSolution, _rank_of

        eigs = np.array([1.0, 1.0])
        assert _rank_of(eigs) == 2
        eigs = np.array([1.0, 1e-6, 0.0])
        assert _rank_of(eigs) == 1


class TestGap:
    def test_reference_values(self):
        # arithmetic of the published gap table, to 0.05 percentage point
        assert optimality_gap(34663.69, 30413.10).gap_percent == pytest.approx(14.00, abs=0.05)
        assert optimality_gap(9128.72, 9030.70).gap_percent == pytest.approx(1.09, abs=0.05)
        assert optimality_gap(2529.87, 2529.49).gap_percent == pytest.approx(0.01, abs=0.05)
        assert optimality_gap(39773.02, 39773.02).gap_percent == pytest.approx(0.00, abs=1e-12)

    def test_zero_gap(self):
        assert optimality_gap(5.0, 5.0).gap_percent == 0.0

    def test_nonpositive_bound_rejected(self):
        with pytest.raises(ValueError):
            optimality_gap(1.0, 0.0)

    def test_scale_invariance_arithmetic(self):
        g1 = optimality_gap(123.4, 100.0).gap_percent
        g2 = optimality_gap(123.4e3, 100.0e3).gap_percent
        assert g1 == pytest.approx(g2, abs=1e-8)


def test_sdpa_emission_parses(case2):
    prob = build_sdp(case2)
    text = to_sdpa(prob)
    lines = text.strip().splitlines()
    assert lines[0].split()[0] == str(prob.m)
    blocks = [int(tok) for tok in lines[2].split()[:-2]]
    assert blocks[0] == prob.w_dim
    # every data line after the header parses as: matrix block row col value
    for ln in lines[4:]:
        toks = ln.split()
        assert len(toks) == 5
        int(toks[0]); int(toks[1]); int(toks[2]); int(toks[3]); float(toks[4])
