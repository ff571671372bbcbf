"""Lookup-table path: explicit mapping, build, query, serialization."""

from __future__ import annotations

import struct

import numpy as np
import pytest

from hpsusp import config, estimator, lookup, metrics, oracle

DT = 1.0 / 360.0


class TestPressureToVelocity:
    def test_quasi_static_is_zero(self, bench_cfg):
        assert lookup.pressure_to_velocity(1.0e6, 0.0, DT, bench_cfg, 1.25) == 0.0

    def test_scalar_case(self, bench_cfg):
        # V_gas = 1e-3*(0.8)^0.8; v = V_gas*dp/(n p A1 dt)
        v = lookup.pressure_to_velocity(1.0e6, 1000.0, 0.002778, bench_cfg, 1.25)
        assert v == pytest.approx(0.0545260482640405, rel=1e-9)

    def test_odd_in_dp(self, bench_cfg):
        v_pos = lookup.pressure_to_velocity(1.2e6, 500.0, DT, bench_cfg, 1.3)
        v_neg = lookup.pressure_to_velocity(1.2e6, -500.0, DT, bench_cfg, 1.3)
        assert v_neg == -v_pos

    def test_sign_convention_compression_positive(self, bench_cfg):
        assert lookup.pressure_to_velocity(1.0e6, 800.0, DT, bench_cfg, 1.25) > 0.0

    def test_injective_over_random_pairs(self, bench_cfg):
        rng = np.random.default_rng(7)
        p = rng.uniform(0.9e6, 3.0e6, 10_000)
        dp = rng.uniform(-5e4, 5e4, 10_000)
        v = lookup.pressure_to_velocity(p, dp, DT, bench_cfg, 1.25)
        # distinct (p, dp) with dp != 0 give distinct v; dp = 0 collapses to 0
        nonzero = dp != 0.0
        assert np.unique(v[nonzero]).size == np.count_nonzero(nonzero)

    def test_monotone_in_dp_and_p(self, bench_cfg):
        dp = np.linspace(-4e4, 4e4, 101)
        v = lookup.pressure_to_velocity(np.full_like(dp, 1.5e6), dp, DT,
                                        bench_cfg, 1.25)
        assert np.all(np.diff(v) > 0.0)
        p = np.linspace(1.0e6, 3.0e6, 101)
        v2 = lookup.pressure_to_velocity(p, np.full_like(p, 1e4), DT,
                                         bench_cfg, 1.25)
        assert np.all(np.diff(v2) < 0.0)

    def test_rejects_nonpositive_pressure(self, bench_cfg):
        with pytest.raises(ValueError):
            lookup.pressure_to_velocity(0.0, 1.0, DT, bench_cfg, 1.25)


class TestBuildTable:
    def test_structure(self, bench_table):
        assert len(bench_table.grids) == 4
        assert bench_table.frequencies_hz == pytest.approx((3.0, 5.0, 7.0, 8.0))
        for g in bench_table.grids:
            assert g.cells.shape == (lookup.N_P, lookup.N_DP, 3)
            assert g.cells.dtype == np.float32
            assert g.coverage >= lookup.MIN_COVERAGE
            assert g.dp_min == pytest.approx(-g.dp_max)
        # shared axes across grids
        g0 = bench_table.grids[0]
        for g in bench_table.grids[1:]:
            assert (g.p_min, g.p_max, g.dp_min, g.dp_max) == \
                (g0.p_min, g0.p_max, g0.dp_min, g0.dp_max)

    def test_cell_payload_size(self, bench_table):
        n = len(bench_table.grids)
        assert n * lookup.N_P * lookup.N_DP * 3 * 4 == 960_000

    def test_needs_two_frequencies(self, bench_cfg):
        with pytest.raises(ValueError):
            lookup.build_table(bench_cfg,
                               config.TableBuildSettings(frequencies_hz=(5.0,)))


class TestQuery:
    def test_grid_node_exact(self, bench_table):
        g = bench_table.grids[1]  # 5 Hz
        i, j = 40, 120
        p = g.p_min + (g.p_max - g.p_min) * i / (lookup.N_P - 1)
        dp = g.dp_min + (g.dp_max - g.dp_min) * j / (lookup.N_DP - 1)
        out = lookup.query(bench_table, p, dp, g.omega)
        assert out == pytest.approx(tuple(float(x) for x in g.cells[i, j]),
                                    rel=1e-9)

    def test_cell_center_is_corner_mean(self, bench_table):
        g = bench_table.grids[0]
        i, j = 10, 50
        step_p = (g.p_max - g.p_min) / (lookup.N_P - 1)
        step_dp = (g.dp_max - g.dp_min) / (lookup.N_DP - 1)
        p = g.p_min + (i + 0.5) * step_p
        dp = g.dp_min + (j + 0.5) * step_dp
        out = np.array(lookup.query(bench_table, p, dp, g.omega))
        mean = g.cells[i:i + 2, j:j + 2].reshape(4, 3).astype(float).mean(axis=0)
        assert np.allclose(out, mean, rtol=1e-6, atol=1e-9)

    def test_midpoint_frequency_blend(self, bench_table):
        g7, g8 = bench_table.grids[2], bench_table.grids[3]
        omega = 0.5 * (g7.omega + g8.omega)  # 7.5 Hz, alpha = 0.5
        p = 0.5 * (g7.p_min + g7.p_max)
        f_mid = lookup.query(bench_table, p, 0.0, omega)[0]
        f7 = lookup.query(bench_table, p, 0.0, g7.omega)[0]
        f8 = lookup.query(bench_table, p, 0.0, g8.omega)[0]
        assert f_mid == pytest.approx(0.5 * (f7 + f8), rel=1e-6)

    def test_out_of_range_clamps_and_counts(self, bench_table):
        g = bench_table.grids[0]
        stats = lookup.QueryStats()
        lo = lookup.query(bench_table, g.p_min - 1e5, 0.0, g.omega, stats)
        edge = lookup.query(bench_table, g.p_min, 0.0, g.omega)
        assert lo == edge
        assert stats.p_clamped == 1


class TestEstimateSeries:
    def test_constant_trace(self, bench_table, bench_cfg):
        p_level = 0.5 * (bench_table.grids[0].p_min + bench_table.grids[0].p_max)
        trace = estimator.PressureTrace(dt=DT, samples=np.full(512, p_level),
                                        t0_temperature=30.0)
        est = lookup.estimate_series(trace, bench_table,
                                     omega=bench_table.grids[1].omega)
        assert np.allclose(est.v, 0.0, atol=1e-6)
        assert np.allclose(est.f_out, est.f_out[0])

    def test_dt_mismatch_raises(self, bench_table):
        trace = estimator.PressureTrace(dt=DT * 2, samples=np.full(64, 1.0e6),
                                        t0_temperature=30.0)
        with pytest.raises(lookup.TimeBaseError):
            lookup.estimate_series(trace, bench_table, omega=30.0)

    def test_grid_frequency_matches_iterative(self, ctx, bench_table, bench_cfg):
        trace = ctx.bench_trace(5.0).to_pressure_trace()
        est = lookup.estimate_series(trace, bench_table,
                                     omega=2 * np.pi * 5.0)
        from hpsusp import estimator as est_mod
        bd = est_mod.run(trace, bench_cfg, freq_override=5.0)
        assert metrics.rel_rmse(est.f_out[2:], bd.f_out[2:]) < 0.02

    def test_auto_frequency_tracking(self, ctx, bench_table):
        trace = ctx.bench_trace(5.0).to_pressure_trace()
        est = lookup.estimate_series(trace, bench_table, omega="auto")
        tracked_hz = est.omega / (2 * np.pi)
        assert np.median(tracked_hz) == pytest.approx(5.0, abs=0.3)


class TestSerialization:
    def test_round_trip_identity(self, bench_table):
        blob = lookup.serialize(bench_table)
        back = lookup.deserialize(blob)
        assert back.dt == bench_table.dt
        assert back.config_digest == bench_table.config_digest
        assert len(back.grids) == len(bench_table.grids)
        for a, b in zip(back.grids, bench_table.grids):
            assert a.omega == b.omega
            assert (a.p_min, a.p_max, a.dp_min, a.dp_max) == \
                (b.p_min, b.p_max, b.dp_min, b.dp_max)
            assert np.array_equal(a.cells, b.cells)
            assert np.array_equal(a.filled, b.filled)

    def test_bad_magic(self, bench_table):
        blob = bytearray(lookup.serialize(bench_table))
        blob[0] ^= 0xFF
        with pytest.raises(lookup.BadMagicError):
            lookup.deserialize(bytes(blob))

    def test_truncated_payload(self, bench_table):
        blob = lookup.serialize(bench_table)
        with pytest.raises(lookup.TruncatedTableError):
            lookup.deserialize(blob[: len(blob) // 2])

    def test_trailing_garbage(self, bench_table):
        blob = lookup.serialize(bench_table) + b"\x00" * 7
        with pytest.raises(lookup.TableFormatError):
            lookup.deserialize(blob)

    def test_digest_mismatch(self, bench_table):
        blob = lookup.serialize(bench_table)
        with pytest.raises(lookup.DigestMismatchError):
            lookup.deserialize(blob, expected_digest=bench_table.config_digest ^ 1)

    def test_header_layout(self, bench_table):
        blob = lookup.serialize(bench_table)
        magic, version, digest, dt, n_freq = struct.unpack_from("<4sIQdI", blob, 0)
        assert magic == b"HPLT"
        assert version == 1
        assert digest == bench_table.config_digest
        assert dt == bench_table.dt
        assert n_freq == len(bench_table.grids)

    def test_save_load_with_config_check(self, bench_table, bench_cfg, tmp_path):
        path = tmp_path / "table.hplt"
        lookup.save_table(bench_table, path)
        back = lookup.load_table(path, bench_cfg)
        assert back.config_digest == bench_table.config_digest
        other = config.mining_truck(30.0).suspension
        with pytest.raises(lookup.DigestMismatchError):
            lookup.load_table(path, other)
