import math

import numpy as np
import pytest

import nfsim as nf
from nfsim.errors import AnalysisError, ConfigError
from nfsim.kernel import SwitchSchedule, TargetConfig, first_order_line_terms


@pytest.fixture(scope="module")
def grid():
    return nf.TimeGrid(0.0, 5.0, 1e-3)


@pytest.fixture(scope="module")
def scheme1_result():
    g = nf.default_grid()
    cfg = nf.Scheme1Config.from_splittings((48.0, -27.0), (28.0, -16.0),
                                           xi1=7.0, xi2=7.0, p_max=19)
    return cfg, nf.run_scheme1(cfg, g)


class TestAlphaBeta:
    def test_symmetric_at_zero_delay(self):
        assert nf.alpha_beta_of_delay(0.0) == (pytest.approx(1 / math.sqrt(2)),
                                               pytest.approx(1 / math.sqrt(2)))

    def test_published_values(self):
        alpha, beta = nf.alpha_beta_of_delay(math.pi / 56.0)
        assert alpha == pytest.approx(0.717, abs=1e-3)
        assert beta == pytest.approx(0.697, abs=1e-3)

    def test_delay_compensation_identity(self):
        for dt in (0.0, 0.03, 0.2, 1.0):
            alpha, beta = nf.alpha_beta_of_delay(dt)
            assert beta * math.exp(dt / 2) == pytest.approx(alpha, rel=1e-14)
            assert alpha ** 2 + beta ** 2 == pytest.approx(1.0, abs=1e-14)

    def test_negative_rejected(self):
        with pytest.raises(ConfigError):
            nf.alpha_beta_of_delay(-0.1)


class TestSingleTarget:
    def test_zero_thickness_dark(self, grid):
        tgt = TargetConfig(0.0, nf.HyperfineConfig.from_splittings(28.0, -28.0))
        res = nf.run_single_target(tgt, nf.E_SIGMA, grid)
        assert np.all(res.traces["I_total"] == 0.0)

    def test_thin_target_beat_structure(self, grid):
        om = 28.0
        tgt = TargetConfig(1.0, nf.HyperfineConfig.from_splittings(om, -om),
                           f_lm=0.8, p_max=1)
        res = nf.run_single_target(tgt, nf.E_SIGMA, grid, p_max=1)
        taus = grid.taus
        expect = (1.0 * 0.8) ** 2 / 2 * (1 + np.cos(2 * om * taus)) * np.exp(-taus)
        assert np.max(np.abs(res.traces["I_total"] - expect)) < 1e-12

    def test_unsplit_thick_target_first_null(self):
        grid = nf.TimeGrid(0.0, 2.0, 1e-4)
        tgt = TargetConfig(7.0, nf.HyperfineConfig.from_splittings(0.0, 0.0),
                           f_lm=0.8, p_max=30)
        res = nf.run_single_target(tgt, nf.E_SIGMA, grid, p_max=30)
        taus = grid.taus
        xi_eff = 7.0 * 0.8
        sel = (taus > 0.2) & (taus < 1.2)
        null_tau = taus[sel][np.argmin(res.traces["I_total"][sel])]
        assert 2 * math.sqrt(xi_eff * null_tau) == pytest.approx(3.8317, abs=2e-3)


class TestScheme1:
    def test_marking_destroys_beat(self, scheme1_result):
        _, res = scheme1_result
        assert res.diagnostics["visibility_target1"] > 0.8
        assert res.diagnostics["visibility_target2"] < 0.15

    def test_polarizer_restores_quarter_shift(self, scheme1_result):
        _, res = scheme1_result
        assert res.diagnostics["fringe_shift_detectors"] == pytest.approx(0.25, abs=0.02)

    def test_no_marking_control_keeps_beat(self, scheme1_result):
        cfg, _ = scheme1_result
        res = nf.run_scheme1(cfg.control_variant(), nf.default_grid())
        assert res.diagnostics["visibility_target2"] > 0.8

    def test_residual_shrinks_with_splitting(self, scheme1_result):
        cfg, base = scheme1_result
        g = nf.default_grid()
        v = [base.diagnostics["visibility_target2"]]
        for s in (1.5, 2.0):
            v.append(nf.run_scheme1(cfg.scaled_splittings(s), g)
                     .diagnostics["visibility_target2"])
        assert v[0] > v[1] > v[2]

    def test_trace_shapes_and_positivity(self, scheme1_result):
        _, res = scheme1_result
        n = res.grid.samples
        for name in ("target1", "gated", "target2", "det_sigma", "det_pi"):
            assert len(res.traces[name]) == n
            assert np.all(res.traces[name] >= 0.0)

    def test_detector_split_recomposes(self, scheme1_result):
        _, res = scheme1_result
        total = res.traces["det_sigma"] + res.traces["det_pi"]
        assert np.allclose(total, res.traces["target2"], rtol=1e-12, atol=1e-300)

    def test_nothing_before_shutter_opens(self, scheme1_result):
        cfg, res = scheme1_result
        t_ns = res.grid.t_ns()
        early = t_ns < cfg.shutter_open_ns
        assert np.all(res.traces["target2"][early] == 0.0)

    def test_field_consistency_enforced(self):
        t1 = TargetConfig(7.0, nf.HyperfineConfig.from_field(39.0, (0, 0, 1)))
        t2 = TargetConfig(7.0, nf.HyperfineConfig.from_field(30.0, (0, 1, 0)))
        with pytest.raises(ConfigError):
            nf.Scheme1Config(t1, t2, matching_case=2)

    def test_direction_enforced(self):
        t1 = TargetConfig(7.0, nf.HyperfineConfig.from_splittings(48.0, -27.0, (1, 0, 0)))
        t2 = TargetConfig(7.0, nf.HyperfineConfig.from_splittings(28.0, -16.0, (0, 1, 0)))
        with pytest.raises(ConfigError):
            nf.Scheme1Config(t1, t2)

    def test_shutter_validated(self):
        with pytest.raises(ConfigError):
            nf.Scheme1Config.from_splittings((48.0, -27.0), (28.0, -16.0),
                                             shutter_ns=(74.0, 7.0))


class TestScheme2Config:
    def test_weights_must_normalize(self):
        with pytest.raises(ConfigError):
            nf.Scheme2Config.build(alpha=0.9, beta=0.9)

    def test_mode_schedule_consistency(self):
        with pytest.raises(ConfigError):
            nf.Scheme2Config.build(mode="storage", storage_events=())
        cfg = nf.Scheme2Config.build(mode="storage")
        with pytest.raises(ConfigError):
            nf.Scheme2Config(cfg.target1, cfg.target2, delay_mode="external")

    def test_unequal_splittings_rejected(self):
        a = TargetConfig(1.0, nf.HyperfineConfig.from_splittings(28.0, -28.0, (0, 0, 1)))
        b = TargetConfig(1.0, nf.HyperfineConfig.from_splittings(30.0, -30.0, (1, 0, 0)))
        with pytest.raises(ConfigError):
            nf.Scheme2Config(a, b)

    def test_auto_alpha_external(self):
        dt = math.pi / 56.0
        cfg = nf.Scheme2Config.build(mode="external", delta_tau=dt, auto_alpha=True)
        assert (cfg.alpha, cfg.beta) == nf.alpha_beta_of_delay(dt)

    def test_auto_alpha_storage_stays_diagonal(self):
        cfg = nf.Scheme2Config.build(mode="storage", auto_alpha=True)
        assert cfg.alpha == pytest.approx(1 / math.sqrt(2))


class TestScheme2Run:
    def test_zero_delay_closed_form(self, grid):
        cfg = nf.Scheme2Config.build(omega2=28.0, xi=1.0, f_lm=0.8, mode="external")
        res = nf.run_scheme2(cfg, grid, p_max=1)
        taus = grid.taus
        pref = 1.0 * 0.8 ** 2 / 8 * np.exp(-taus)
        expect = pref * (1 + np.cos(2 * 28.0 * taus))
        assert np.max(np.abs(res.traces["det1"] - expect)) < 1e-12
        assert np.array_equal(res.traces["det1"], res.traces["det2"])

    def test_detector_sum_rule(self, grid):
        dt = math.pi / 56.0
        cfg = nf.Scheme2Config.build(omega2=28.0, xi=1.0, mode="external",
                                     delta_tau=dt, auto_alpha=True)
        res = nf.run_scheme2(cfg, grid, p_max=6)
        assert res.diagnostics["sum_rule_residual"] < 1e-12

    def test_eraser_completeness(self, grid):
        dt = math.pi / 56.0
        cfg = nf.Scheme2Config.build(omega2=28.0, xi=1.0, mode="external",
                                     delta_tau=dt, auto_alpha=True)
        res = nf.run_scheme2(cfg, grid, p_max=6)
        total = res.traces["eraser_sigma"] + res.traces["eraser_pi"]
        assert np.allclose(total, res.traces["det1"], rtol=1e-12, atol=1e-300)

    def test_marking_phases_are_antisymmetric(self, grid):
        # the two main lines acquire opposite-sign phase factors exp(-/+ i Phi)
        # relative to the undelayed arm
        om, dt = 28.0, math.pi / 56.0
        phi = om * dt
        cfg = nf.Scheme2Config.build(omega2=om, xi=1.0, mode="external",
                                     delta_tau=dt, auto_alpha=True)
        ref = {ln.omega: term for ln, term in
               first_order_line_terms(cfg.target1, nf.E_SIGMA, grid)}
        delayed = {ln.omega: term for ln, term in
                   first_order_line_terms(cfg.target2, nf.E_PI, grid, impulse_tau=dt)}
        taus = grid.taus
        k = np.argmin(np.abs(taus - 2.0))
        boost = math.exp(dt / 2)
        for om_l in (-om, om):
            ratio = delayed[om_l][k, 1] / ref[om_l][k, 0]
            expect = boost * np.exp(-1j * np.sign(-om_l) * phi)
            assert ratio == pytest.approx(expect, rel=1e-10)

    def test_which_way_flat_envelope(self, grid):
        om, dt = 28.0, math.pi / 56.0
        cfg = nf.Scheme2Config.build(omega2=om, xi=1.0, mode="external",
                                     delta_tau=dt, auto_alpha=True)
        res = nf.run_scheme2(cfg, grid, p_max=1)
        assert res.diagnostics["visibility_det1"] < 1e-10
        assert res.diagnostics["fringe_shift_eraser"] == pytest.approx(0.25, abs=0.02)

    def test_storage_marking_and_restore(self, grid):
        om = 28.0
        res1 = nf.run_scheme2(nf.Scheme2Config.build(omega2=om, mode="storage"),
                              grid, p_max=1)
        assert res1.diagnostics["visibility_det1"] < 1e-10
        ev = nf.default_storage_events(om, n_windows=2)
        cfg2 = nf.Scheme2Config.build(omega2=om, mode="storage", storage_events=ev)
        res2 = nf.run_scheme2(cfg2, grid, p_max=1,
                              analysis_window=(2 * ev[-1][1], 5.0))
        assert res2.diagnostics["visibility_det1"] > 0.8

    def test_zero_length_window_equals_no_delay(self, grid):
        om = 28.0
        q = math.pi / (2 * om)
        stored = nf.Scheme2Config.build(omega2=om, mode="storage",
                                        storage_events=((q, q),))
        plain = nf.Scheme2Config.build(omega2=om, mode="external")
        a = nf.run_scheme2(stored, grid, p_max=4)
        b = nf.run_scheme2(plain, grid, p_max=4)
        assert np.array_equal(a.traces["det1"], b.traces["det1"])


class TestStorageEquivalence:
    def test_matches_external_delay(self, grid):
        om = 28.0
        dt = math.pi / (2 * om)
        ext = nf.Scheme2Config.build(omega2=om, mode="external", delta_tau=dt)
        sto = nf.Scheme2Config.build(omega2=om, mode="storage")
        rep = nf.storage_delay_equivalence(ext, sto, grid)
        assert rep.max_line_phase_dev < 1e-10
        assert rep.max_field_dev_rel < 1e-10
        assert rep.measured_scale == pytest.approx(rep.expected_scale, rel=1e-10)
        assert rep.equivalent

    def test_window_length_must_match(self, grid):
        om = 28.0
        ext = nf.Scheme2Config.build(omega2=om, mode="external", delta_tau=0.01)
        sto = nf.Scheme2Config.build(omega2=om, mode="storage")
        with pytest.raises(ConfigError):
            nf.storage_delay_equivalence(ext, sto, grid)


class TestDefaultStorageEvents:
    def test_first_window_at_beat_minimum(self):
        om = 28.0
        (t0, t1), = nf.default_storage_events(om)
        assert t0 == pytest.approx(math.pi / (2 * om))
        assert t1 - t0 == pytest.approx(math.pi / (2 * om))

    def test_second_window_spacing(self):
        om = 28.0
        ev = nf.default_storage_events(om, n_windows=2)
        assert len(ev) == 2
        # second switch-off sits at a minimum of the delayed pattern
        dt = ev[0][1] - ev[0][0]
        phase = om * (ev[1][0] - dt)
        assert math.cos(phase) == pytest.approx(0.0, abs=1e-12)

    def test_invalid_window_count(self):
        with pytest.raises(ConfigError):
            nf.default_storage_events(28.0, n_windows=3)
