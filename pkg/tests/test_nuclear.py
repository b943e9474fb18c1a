import numpy as np
import pytest

import nfsim as nf
from nfsim.errors import ConfigError


class TestZeemanSplitting:
    def test_published_ground_value(self):
        assert nf.zeeman_splitting(39.0, "ground") == pytest.approx(48.0, rel=0.02)

    def test_published_excited_value(self):
        assert nf.zeeman_splitting(23.0, "excited") == pytest.approx(-16.0, rel=0.02)

    def test_zero_field(self):
        assert nf.zeeman_splitting(0.0, "ground") == 0.0

    def test_negative_field_rejected(self):
        with pytest.raises(ConfigError):
            nf.zeeman_splitting(-1.0, "ground")

    def test_unknown_level_rejected(self):
        with pytest.raises(ConfigError):
            nf.zeeman_splitting(1.0, "isomer")

    def test_linear_in_field(self):
        for b in (0.5, 3.0, 17.0, 39.0):
            assert nf.zeeman_splitting(2 * b, "excited") == 2 * nf.zeeman_splitting(b, "excited")


class TestTransitionTable:
    def test_six_lines(self):
        hf = nf.HyperfineConfig.from_splittings(48.0, -27.0)
        table = nf.transition_table(hf)
        assert len(table) == 6
        assert all(abs(ln.delta_m) <= 1 for ln in table)

    def test_line_offset_example(self):
        hf = nf.HyperfineConfig.from_splittings(48.0, -27.0)
        table = nf.transition_table(hf)
        line = next(ln for ln in table if ln.m_ground == 0.5 and ln.m_excited == 0.5)
        assert line.omega == pytest.approx(37.5, abs=1e-12)

    def test_offset_odd_under_projection_flip(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            eg, ee = rng.uniform(-60, 60, size=2)
            hf = nf.HyperfineConfig.from_splittings(eg, ee)
            table = {(ln.m_ground, ln.m_excited): ln.omega for ln in nf.transition_table(hf)}
            for (mg, me), om in table.items():
                assert table[(-mg, -me)] == pytest.approx(-om, abs=1e-12)

    def test_zero_field_degenerate(self):
        hf = nf.HyperfineConfig.from_splittings(0.0, 0.0)
        assert all(ln.omega == 0.0 for ln in nf.transition_table(hf))

    def test_main_line_separation(self):
        hf = nf.HyperfineConfig.from_splittings(28.0, -16.0)
        main = [ln.omega for ln in nf.transition_table(hf) if ln.delta_m == 0]
        assert abs(main[0] - main[1]) == pytest.approx(abs(28.0 + 16.0), abs=1e-12)

    def test_transverse_field_couplings(self):
        # field along z: main lines scatter sigma -> sigma with weight f/2,
        # the other four lines touch only the pi channel
        hf = nf.HyperfineConfig.from_splittings(28.0, -16.0, direction=[0, 0, 1])
        for ln in nf.transition_table(hf, f_lm=0.8):
            a = ln.amplitude
            if ln.delta_m == 0:
                assert abs(a[0]) ** 2 == pytest.approx(0.4, abs=1e-14)
                assert abs(a[1]) == 0.0
            else:
                assert abs(a[0]) == 0.0
                assert abs(a[1]) > 0.0

    def test_beam_axis_field_suppresses_main_lines(self):
        hf = nf.HyperfineConfig.from_splittings(28.0, -16.0, direction=[0, 1, 0])
        for ln in nf.transition_table(hf):
            if ln.delta_m == 0:
                assert ln.strength == 0.0
            else:
                assert ln.strength > 0.0

    def test_storage_geometry_pi_conserving(self):
        # field along x: main lines map pi -> pi with weight f/2
        hf = nf.HyperfineConfig.from_splittings(28.0, -28.0, direction=[1, 0, 0])
        for ln in nf.transition_table(hf, f_lm=0.8):
            if ln.delta_m == 0:
                assert abs(ln.amplitude[1]) ** 2 == pytest.approx(0.4, abs=1e-14)
                assert abs(ln.amplitude[0]) == 0.0

    def test_channel_weight_sums_match(self):
        # total coupling weight must be the same for sigma and pi drives
        hf = nf.HyperfineConfig.from_splittings(30.0, -17.0)
        table = nf.transition_table(hf, f_lm=0.8)
        w_sigma = sum(abs(ln.amplitude[0]) ** 2 for ln in table)
        w_pi = sum(abs(ln.amplitude[1]) ** 2 for ln in table)
        assert w_sigma == pytest.approx(0.8, abs=1e-14)
        assert w_pi == pytest.approx(0.8, abs=1e-14)

    def test_other_spins_rejected(self):
        odd = nf.IsotopeConstants(spin_ground=2.5, spin_excited=3.5)
        hf = nf.HyperfineConfig.from_splittings(10.0, -5.0)
        with pytest.raises(ConfigError):
            nf.transition_table(hf, constants=odd)

    def test_sextet_index_covers_all_lines(self):
        hf = nf.HyperfineConfig.from_splittings(48.0, -27.0)
        table = nf.transition_table(hf)
        indices = sorted(nf.sextet_index(ln, table) for ln in table)
        assert indices == [1, 2, 3, 4, 5, 6]


class TestMatchingField:
    def test_case2_published(self):
        assert nf.matching_field(39.0, 2) == pytest.approx(22.6, abs=0.5)

    def test_case2_ratio_arithmetic(self):
        # (0.18088 + 3*0.10327) / (0.18088 + 0.10327)
        assert nf.matching_ratio(2) == pytest.approx(1.727, abs=2e-3)

    def test_case1_ratio_and_direction(self):
        assert nf.matching_ratio(1) == pytest.approx(0.273, abs=1e-3)
        assert nf.matching_field(10.0, 1) > 10.0

    def test_roundtrip(self):
        for case in (1, 2):
            b2 = nf.matching_field(39.0, case)
            back = nf.matching_field(b2, case, inverse=True)
            assert back == pytest.approx(39.0, rel=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(ConfigError):
            nf.matching_field(0.0, 2)
        with pytest.raises(ConfigError):
            nf.matching_field(39.0, 3)

    def test_matched_lines_align(self):
        # the matched pair of beam-axis lines must sit exactly on the
        # transverse target's main-line offsets: case 1 aligns the inner
        # |dM| = 1 pair at (eps_g + eps_e)/2, case 2 the outer pair at
        # eps_g/2 - 3 eps_e/2
        b1 = 39.0
        om1 = nf.HyperfineConfig.from_field(b1).delta_m0_offset
        for case in (1, 2):
            b2 = nf.matching_field(b1, case)
            eg = nf.zeeman_splitting(b2, "ground")
            ee = nf.zeeman_splitting(b2, "excited")
            om2 = (eg + ee) / 2 if case == 1 else eg / 2 - 1.5 * ee
            assert om2 == pytest.approx(om1, rel=1e-12)


class TestHyperfineConfig:
    def test_direction_normalized(self):
        hf = nf.HyperfineConfig.from_splittings(10.0, -5.0, direction=[0, 0, 2.0])
        assert np.linalg.norm(hf.field_direction) == pytest.approx(1.0, abs=1e-12)

    def test_from_field_consistency(self):
        hf = nf.HyperfineConfig.from_field(39.0)
        assert hf.eps_ground == nf.zeeman_splitting(39.0, "ground")
        assert hf.eps_excited == nf.zeeman_splitting(39.0, "excited")
        assert hf.field_magnitude == 39.0

    def test_zero_direction_rejected(self):
        with pytest.raises(ConfigError):
            nf.HyperfineConfig.from_splittings(1.0, -1.0, direction=[0, 0, 0])

    def test_scaled(self):
        hf = nf.HyperfineConfig.from_splittings(10.0, -6.0).scaled(2.0)
        assert (hf.eps_ground, hf.eps_excited) == (20.0, -12.0)
