import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from energylab import (
    ForcingSpec,
    Grid,
    InitialSpec,
    SolverConfig,
    budget_row,
    classify,
    ee_defect,
    energy_scale,
    flux_convergence,
    lemma_defect,
    regularity_norms,
    sei_margin,
    simulate,
    theorem_check,
)
from energylab.audit import _window_integral, low_pass_defect, sei_margins
from energylab.solver import BudgetSeries, Trajectory


@pytest.fixture(scope="module")
def tg16():
    cfg = SolverConfig(Grid(16), 0.05, 5e-3, 0.5, ForcingSpec("none"), InitialSpec("taylor_green"), snapshot_stride=5)
    return simulate(cfg)


def synthetic(ts, energy, enstrophy, work, nu=0.1):
    cfg = SolverConfig(Grid(8), nu, ts[1] - ts[0], ts[-1])
    budget = BudgetSeries(np.asarray(ts, float), np.asarray(energy, float), np.asarray(enstrophy, float), np.asarray(work, float))
    return Trajectory(cfg, np.asarray(ts, float), [], budget)


class TestWindowIntegral:
    def test_cubic_exact(self):
        ts = np.array([0.0, 0.5, 1.0, 2.0, 3.0])
        ys = ts**3 - 2 * ts
        assert _window_integral(ts, ys, 0.0, 3.0) == pytest.approx(81 / 4 - 9, rel=1e-14)
        assert _window_integral(ts, ys, 0.25, 2.5) == pytest.approx((2.5**4 - 0.25**4) / 4 - (2.5**2 - 0.25**2), rel=1e-14)

    def test_two_samples_linear(self):
        assert _window_integral([0.0, 2.0], [1.0, 3.0], 0.0, 2.0) == pytest.approx(4.0)
        assert _window_integral([0.0], [1.0], 0.0, 0.0) == 0.0

    @given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 3.0))
    def test_additive(self, a, b, c):
        ts = np.linspace(0.0, 3.0, 13)
        ys = np.cos(ts) ** 2
        total = _window_integral(ts, ys, a, b) + _window_integral(ts, ys, b, c)
        assert total == pytest.approx(_window_integral(ts, ys, a, c), abs=1e-13)


class TestBudget:
    def test_synthetic_energy_equality(self):
        # E(t) = e^{-2 nu t} with ||u||^2 = e^{-2 nu t}: dE/dt = -2 nu ||u||^2 holds exactly
        nu = 0.1
        ts = np.linspace(0.0, 1.0, 2001)
        e = np.exp(-2 * nu * ts)
        traj = synthetic(ts, e, e, 0 * ts, nu)
        assert abs(ee_defect(traj, 0.0, 1.0)) < 1e-8
        row = budget_row(traj, 0.0, 1.0)
        assert row.kinetic_change == pytest.approx(e[-1] - e[0])

    def test_window_errors(self):
        traj = synthetic([0.0, 0.5, 1.0], [1, 1, 1], [0, 0, 0], [0, 0, 0])
        for t0, t in ((-0.5, 1.0), (0.0, 1.5), (0.8, 0.2)):
            with pytest.raises(ValueError):
                ee_defect(traj, t0, t)

    def test_sei_margin(self):
        # energy dropping faster than dissipation explains leaves a positive margin
        traj = synthetic([0.0, 0.5, 1.0], [1.0, 0.5, 0.2], [0.1, 0.1, 0.1], [0, 0, 0])
        assert sei_margin(traj, 0.0, 1.0) > 0
        assert np.all(sei_margins(traj, 1.0) >= 0)

    def test_energy_scale_at_least_initial_energy(self, tg16):
        assert energy_scale(tg16, 0.0, 0.5) >= tg16.budget.energy[0]

    def test_ee_defect_small_on_resolved_run(self, tg16):
        assert abs(ee_defect(tg16, 0.0, 0.5)) <= 1e-7 * energy_scale(tg16, 0.0, 0.5)


class TestFlux:
    def test_lemma_defect_matches_ee_at_top(self, tg16):
        lam = tg16.config.grid.lambda_max
        for t0, t in ((0.0, 0.5), (0.1, 0.3)):
            diff = lemma_defect(tg16, t0, t, lam) - ee_defect(tg16, t0, t)
            assert abs(diff) <= 1e-12 * energy_scale(tg16, t0, t)

    def test_low_pass_defect_shrinks_with_sampling(self, tg16):
        assert abs(low_pass_defect(tg16, 0.0, 0.5, 9.0)) < 1e-2 * energy_scale(tg16, 0.0, 0.5)

    def test_report_shape_and_flags(self, tg16):
        lam = tg16.config.grid.lambda_max
        report = flux_convergence(tg16, [4, 9, lam], windows=[(0.0, 0.25), (0.0, 0.5)])
        assert len(report.rows) == 6
        assert report.envelope_ok and report.top_rung_ok
        assert report.row_for(4.0).flux_integral > 100 * report.row_for(float(lam)).flux_integral
        assert len(report.table()[0]) == len(report.COLUMNS)
        assert flux_convergence(tg16, [4, 9]).top_rung_ok is None

    def test_report_rejects_bad_ladders(self, tg16):
        with pytest.raises(ValueError):
            flux_convergence(tg16, [])
        with pytest.raises(ValueError):
            flux_convergence(tg16, [9, 4])

    def test_envelope_fails_for_tiny_constant(self, tg16):
        assert not flux_convergence(tg16, [4.0], majorant_constant=1e-12).envelope_ok


class TestClassifier:
    @pytest.mark.parametrize("r, s, serrin, shinbrot, value", [
        (4, 4, False, True, Fraction(1)),
        (3, Fraction(9, 2), False, False, Fraction(10, 9)),
        (8, 4, True, True, Fraction(3, 4)),  # Serrin holds with equality
        (2, 6, False, False, Fraction(4, 3)),
        ("inf", 3, True, False, Fraction(2, 3)),
        (2, "inf", True, True, Fraction(1)),
    ])
    def test_table(self, r, s, serrin, shinbrot, value):
        f = classify(r, s)
        assert f.satisfies_serrin is serrin
        assert f.satisfies_shinbrot is shinbrot
        assert f.shinbrot_value == value

    def test_serrin_value_exact(self):
        assert classify(2, 6).serrin_value == Fraction(3, 2)
        assert classify(5, 5).serrin_value == 1
        assert classify(5, 5).satisfies_serrin

    def test_float_exponent_is_exact(self):
        assert classify(3, 4.5).on_new_scaling
        assert classify(math.inf, 3).r is None

    def test_rejects_small_exponents(self):
        with pytest.raises(ValueError):
            classify(0.5, 4)


class TestTheorem:
    def test_regularity_norms(self, tg16):
        reg = regularity_norms(tg16)
        assert reg.finite
        assert reg.sup_l2 == pytest.approx(math.sqrt(tg16.budget.energy[0]))
        assert [(row.r, row.s) for row in reg.lrls_table] == [(4, 4), (3, 4.5), (8, 4), (math.inf, 3)]
        # max |u| of TG is 1 and decays, so ||u||_{L^3} <= (2 pi)^(3/3)
        assert reg.lrls_table[-1].norm < 2 * math.pi

    def test_needs_two_samples(self):
        traj = synthetic([0.0, 1.0], [1, 1], [0, 0], [0, 0])
        traj.budget = BudgetSeries(*(a[:1] for a in (traj.budget.t, traj.budget.energy, traj.budget.enstrophy, traj.budget.work_rate)))
        with pytest.raises(ValueError):
            regularity_norms(traj)

    def test_verdict(self, tg16):
        v = theorem_check(tg16)
        assert v.passed and v.hypotheses_finite
        assert v.tolerance == pytest.approx(1e-7 * v.scale)
        assert v.notes == [] or v.notes[0].startswith("under-resolved")

    def test_verdict_fails_on_broken_budget(self, tg16):
        b = tg16.budget
        broken = Trajectory(tg16.config, tg16.times, tg16.snapshots,
                            BudgetSeries(b.t, b.energy * 1.01, b.enstrophy, b.work_rate))
        assert not theorem_check(broken).passed


class TestOperationExamples:
    def test_empty_window(self, tg16):
        assert ee_defect(tg16, 0.2, 0.2) == 0.0
        assert sei_margin(tg16, 0.2, 0.2) == 0.0

    def test_stokes_defect(self):
        cfg = SolverConfig(Grid(16), 0.1, 1e-3, 0.5, initial=InitialSpec("random", seed=2), nonlinear=False, snapshot_stride=100)
        traj = simulate(cfg)
        assert abs(ee_defect(traj, 0.0, 0.5)) <= 1e-9 * traj.budget.energy[0]

    def test_sei_margin_resolved(self, tg16):
        assert np.all(sei_margins(tg16, 0.5) >= -1e-8 * tg16.budget.energy[0])

    def test_underresolved_run_flagged(self):
        cfg = SolverConfig(Grid(16), 1e-3, 1e-2, 1.0, initial=InitialSpec("random", slope=0.0, seed=1), snapshot_stride=10)
        verdict = theorem_check(simulate(cfg))
        assert verdict.tail_fraction > 1e-6
        assert any(n.startswith("under-resolved") for n in verdict.notes)

    def test_beltrami_flux_vanishes(self):
        cfg = SolverConfig(Grid(16), 0.1, 1e-2, 0.2, initial=InitialSpec("beltrami", (1.0, 0.5, 0.2)), snapshot_stride=5)
        traj = simulate(cfg)
        for kappa in (0.5, 1.0, 4.0):
            report = flux_convergence(traj, [kappa])
            assert report.rows[0].flux_integral <= 1e-12
            assert lemma_defect(traj, 0.0, 0.2, kappa) == pytest.approx(ee_defect(traj, 0.0, 0.2), abs=1e-12)

    def test_taylor_green_ladder(self, tg16):
        lam = tg16.config.grid.lambda_max
        ladder = [float(m * m) for m in range(1, 6)]
        report = flux_convergence(tg16, ladder)
        # kappa = 1 sits below every TG mode, so equality up to round-off is allowed
        slack = 1e-12 * report.scale
        assert abs(report.row_for(float(lam)).lemma_defect) <= abs(report.row_for(1.0).lemma_defect) + slack
        top = report.row_for(float(lam))
        for value in (top.flux_integral, top.hh_integral, top.lh_integral):
            assert value <= 1e-11 * report.scale

    def test_stationary_l3_v56(self):
        cfg = SolverConfig(Grid(16), 0.1, 2e-2, 0.6, ForcingSpec("balanced"), InitialSpec("beltrami"), snapshot_stride=5)
        traj = simulate(cfg)
        reg = regularity_norms(traj)
        u0 = traj.snapshots[0]
        from energylab import sobolev_norm

        assert reg.l3_v56 == pytest.approx(sobolev_norm(u0, 5 / 6) * 0.6 ** (1 / 3), rel=1e-12)

    def test_zero_data_passes(self):
        traj = simulate(SolverConfig(Grid(8), 0.1, 1e-2, 0.1, initial=InitialSpec("zero")))
        v = theorem_check(traj)
        assert v.passed and v.ee_defect == 0.0
        assert v.regularity.l3_v56 == 0.0 and v.regularity.sup_l2 == 0.0
