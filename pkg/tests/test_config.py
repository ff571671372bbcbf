"""Configuration presets, digesting, and the flat config-file format."""

from __future__ import annotations

import math

import pytest

from hpsusp import config


class TestPresets:
    def test_preset_names(self):
        for name in config.PRESET_NAMES:
            rc = config.preset(name)
            assert rc.suspension.geom.a1 > 0.0

    def test_unknown_preset(self):
        with pytest.raises(config.ConfigError):
            config.preset("hovercraft")

    def test_bench_geometry_areas(self):
        cfg = config.bench_prototype()
        g = cfg.geom
        assert g.a1 == pytest.approx(4.418e-3)
        assert g.a2 == pytest.approx(1.885e-3)
        assert g.a3 == pytest.approx(g.a1 - g.a2, abs=1e-12)
        assert g.d_ch == pytest.approx(6.0e-3, rel=1e-9)

    def test_truck_masses_and_tire(self):
        rc = config.mining_truck()
        qc = rc.quarter_car
        assert (qc.m_s, qc.m_u, qc.m_t) == (7500.0, 800.0, 500.0)
        assert qc.k_t == 2.0e6
        assert rc.linkage.m_t <= rc.linkage.m_u

    def test_truck_static_ratio(self):
        link = config.mining_truck().linkage
        assert link.static_ratio() == pytest.approx(0.7007464749503204, rel=1e-12)

    def test_algorithm_reference_linkage(self):
        link = config.algorithm_reference_linkage()
        assert link.l_eff == pytest.approx(0.15)
        assert link.alpha0 == pytest.approx(math.radians(5.0))
        assert link.m_t == 80.0

    def test_oil_viscosity_anchors(self):
        assert config.oil_viscosity(30.0) == pytest.approx(0.065, rel=1e-9)
        assert config.oil_viscosity(50.0) == pytest.approx(0.032, rel=1e-9)
        mid = config.oil_viscosity(40.0)
        assert 0.032 < mid < 0.065


class TestDigest:
    def test_stable(self):
        a = config.bench_prototype(30.0).digest()
        b = config.bench_prototype(30.0).digest()
        assert a == b

    def test_sensitive_to_parameters(self):
        a = config.bench_prototype(30.0).digest()
        b = config.bench_prototype(50.0).digest()
        c = config.mining_truck(30.0).suspension.digest()
        assert len({a, b, c}) == 3

    def test_fits_in_u64(self):
        d = config.bench_prototype().digest()
        assert 0 <= d < 2 ** 64


class TestConfigFile:
    def test_save_load_round_trip(self, tmp_path):
        rc = config.mining_truck(30.0)
        path = tmp_path / "truck.cfg"
        config.save_run_config(rc, path)
        back = config.load_run_config(path)
        assert back.suspension == rc.suspension
        assert back.linkage == rc.linkage
        assert back.quarter_car.m_s == rc.quarter_car.m_s
        assert back.table == rc.table
        assert back.suspension.digest() == rc.suspension.digest()

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("suspension.warp_factor = 9\n")
        with pytest.raises(config.ConfigError):
            config.load_run_config(path)

    def test_invalid_value_rejected(self, tmp_path):
        rc = config.bench_run_config()
        path = tmp_path / "cfg.cfg"
        config.save_run_config(rc, path)
        text = path.read_text().replace(
            "suspension.gamma = 1.4", "suspension.gamma = 0.9")
        path.write_text(text)
        with pytest.raises((config.ConfigError, ValueError)):
            config.load_run_config(path)

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        rc = config.bench_run_config()
        path = tmp_path / "cfg.cfg"
        config.save_run_config(rc, path)
        text = "# leading comment\n\n" + path.read_text() + "\n# trailing\n"
        path.write_text(text)
        back = config.load_run_config(path)
        assert back.suspension == rc.suspension
