import numpy as np
import pytest

from opfkit.netmodel import Branch, Bus, Case, CostPoly, Generator, build_admittance, check_feasibility
from opfkit.localopt import (
    _OpfNlp,
    kkt_residual,
    multistart,
    solve_local,
)
from oracles import central_diff_gradient


@pytest.fixture(scope="module")
def single_bus():
    return Case(
        base_mva=100.0,
        buses=[Bus(id=1, p_load=40, q_load=10)],
        gens=[Generator(bus=1, p_min=0, p_max=100, q_min=-50, q_max=50)],
        branches=[],
        costs=[CostPoly(0.1, 25, 7)],
        ref_bus=1,
    )


class TestSolveLocal:
    def test_zero_load_dispatch(self, case2_zero_load):
        pt = solve_local(case2_zero_load)
        assert pt.status == "local-optimum"
        assert pt.p_gen[0] == pytest.approx(0.0, abs=1e-5)
        assert pt.objective == pytest.approx(5.0, abs=1e-4)

    def test_single_bus_degenerate(self, single_bus):
        pt = solve_local(single_bus)
        assert pt.status == "local-optimum"
        assert pt.p_gen[0] == pytest.approx(40.0, abs=1e-7)
        assert pt.objective == pytest.approx(0.1 * 40**2 + 25 * 40 + 7, abs=1e-6)

    def test_objective_consistent_with_evaluate(self, case3):
        from opfkit.netmodel import evaluate_point

        pt = solve_local(case3)
        ev = evaluate_point(case3, build_admittance(case3), pt.v)
        assert pt.objective == pytest.approx(ev.objective, rel=1e-8)

    def test_feasible_at_tolerance(self, case3, ieee14):
        for case in (case3, ieee14):
            pt = solve_local(case)
            assert pt.status == "local-optimum"
            rep = check_feasibility(case, pt.v)
            assert rep.min_slack_pu(case.base_mva) > -1e-6

    def test_ieee14_reference_objective(self, ieee14):
        pt = solve_local(ieee14)
        assert pt.status == "local-optimum"
        assert pt.objective == pytest.approx(8081.53, rel=2e-4)

    def test_ieee57_reference_objective(self, ieee57):
        pt = solve_local(ieee57)
        assert pt.status == "local-optimum"
        assert pt.objective == pytest.approx(41737.79, rel=2e-4)


class TestKkt:
    def test_converged_point_passes(self, case3):
        pt = solve_local(case3)
        res = kkt_residual(case3, pt)
        assert res.passed(1e-6)

    def test_perturbation_breaks_stationarity(self, case3):
        pt = solve_local(case3)
        v = pt.v.copy()
        v[1] = v[1] * (1.0 + 1e-3)
        bumped = type(pt)(
            v=v, p_gen=pt.p_gen, q_gen=pt.q_gen, objective=pt.objective,
            status=pt.status, binding=pt.binding, kkt=pt.kkt, multipliers=pt.multipliers,
        )
        res = kkt_residual(case3, bumped)
        assert res.stationarity > 1e-6

    def test_gradients_match_finite_differences(self, case3):
        nlp = _OpfNlp(case3)
        rng = np.random.default_rng(5)
        for _ in range(20):
            x = np.concatenate([rng.uniform(0.92, 1.08, 3), rng.uniform(-0.3, 0.3, 2)])
            ev = nlp.eval_all(x)
            fd = central_diff_gradient(lambda xx: nlp.eval_all(xx)["f"], x)
            scale = 1.0 + np.max(np.abs(fd))
            assert np.max(np.abs(fd - ev["grad_f"])) / scale < 1e-5
            for i in range(nlp.neq):
                fd = central_diff_gradient(lambda xx: nlp.eval_all(xx)["g"][i], x)
                assert np.max(np.abs(fd - ev["jg"][i])) / (1 + np.max(np.abs(fd))) < 1e-5
            for i in range(0, nlp.niq, 3):
                fd = central_diff_gradient(lambda xx: nlp.eval_all(xx)["h"][i], x)
                assert np.max(np.abs(fd - ev["jh"][i])) / (1 + np.max(np.abs(fd))) < 1e-5

    def test_lagrangian_hessian_matches_finite_differences(self, case3):
        nlp = _OpfNlp(case3)
        rng = np.random.default_rng(6)
        lam = rng.normal(size=nlp.neq)
        mu = np.abs(rng.normal(size=nlp.niq))
        x = np.concatenate([rng.uniform(0.95, 1.05, 3), rng.uniform(-0.2, 0.2, 2)])
        ev = nlp.eval_all(x)
        hess = nlp.lagrangian_hessian(ev, lam, mu)

        def lag_grad(xx):
            e = nlp.eval_all(xx)
            return e["grad_f"] + e["jg"].T @ lam + e["jh"].T @ mu

        fd = np.zeros_like(hess)
        h = 1e-6
        for i in range(nlp.nx):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            fd[:, i] = (lag_grad(xp) - lag_grad(xm)) / (2 * h)
        assert np.max(np.abs(hess - fd)) / (1 + np.max(np.abs(fd))) < 1e-5


class TestMultistart:
    def test_deterministic(self, case3):
        a = multistart(case3, n_starts=15, seed=9)
        b = multistart(case3, n_starts=15, seed=9)
        assert [p.objective for p in a.points] == [p.objective for p in b.points]
        assert a.basin_counts == b.basin_counts

    def test_single_optimum_on_benign_case(self, case3):
        out = multistart(case3, n_starts=25, seed=1)
        assert len(out.points) == 1
        assert sum(out.basin_counts) + out.n_failed + out.n_stationary == out.n_starts

    def test_sorted_and_feasible(self, case3):
        out = multistart(case3, n_starts=15, seed=2)
        objs = [p.objective for p in out.points]
        assert objs == sorted(objs)
        for p in out.points:
            assert p.binding.min_slack_pu(case3.base_mva) > -1e-6
