"""ECU lookup-table path: offline table generation, queries and serialization.

The table maps a pressure sample pair -- current gas pressure P and its
one-sample backward increment dP -- to (piston velocity, output force,
piston displacement). One grid is stored per characterization frequency;
queries at intermediate frequencies blend the two bracketing grids
linearly. All grids share the same (P, dP) axes so blending reduces to a
weighted sum of cell arrays.

The mapping is injective because the velocity implied by a pressure pair,

    v = V_gas(P) * dP / (n_eff * P * A1 * dt),

is strictly monotone in dP at fixed P, and the force chain is a function
of (P, v) only once the sampling period and gas state are fixed.
"""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import core, estimator, oracle
from .config import SuspensionConfig, TableBuildSettings

__all__ = [
    "LookupGrid",
    "LookupTable",
    "QueryStats",
    "SeriesEstimate",
    "TableFormatError",
    "BadMagicError",
    "TruncatedTableError",
    "DigestMismatchError",
    "TableCoverageError",
    "TimeBaseError",
    "pressure_to_velocity",
    "build_table",
    "query",
    "estimate_series",
    "serialize",
    "deserialize",
    "save_table",
    "load_table",
    "benchmark",
]

MAGIC = b"HPLT"
VERSION = 1
N_P = 100      # pressure axis cells
N_DP = 200     # pressure-increment axis cells
AXIS_PAD = 0.05
MIN_COVERAGE = 0.30


class TableFormatError(ValueError):
    """Malformed serialized lookup table."""


class BadMagicError(TableFormatError):
    """Serialized blob does not start with the table magic."""


class TruncatedTableError(TableFormatError):
    """Serialized blob ends before the declared payload."""


class DigestMismatchError(TableFormatError):
    """Table was built for a different suspension configuration."""


class TableCoverageError(RuntimeError):
    """Characterization sweep covered too little of the grid."""


class TimeBaseError(ValueError):
    """Query trace sampling period differs from the table's."""


def pressure_to_velocity(p, dp, dt: float, cfg: SuspensionConfig, n_eff: float):
    """Piston velocity implied by a pressure sample pair.

    dp is the backward pressure increment P[i] - P[i-1] over one sampling
    period dt; positive dp (rising pressure) means compression sensing,
    hence positive velocity.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0):
        raise ValueError("gas pressure must be positive")
    if dt <= 0.0:
        raise ValueError("sampling period must be positive")
    v_gas = core.gas_volume(p, cfg.charge, cfg.geom, n_eff)
    v = v_gas * np.asarray(dp, dtype=float) / (n_eff * p * cfg.geom.a1 * dt)
    return float(v) if v.ndim == 0 else v


@dataclass
class LookupGrid:
    """One frequency slice: cells[i_p, i_dp, :] = (f_out, v, h)."""

    omega: float                     # rad/s
    p_min: float
    p_max: float
    dp_min: float
    dp_max: float
    cells: np.ndarray                # float32, shape (N_P, N_DP, 3)
    filled: np.ndarray               # bool, shape (N_P, N_DP): swept region

    @property
    def coverage(self) -> float:
        return float(np.count_nonzero(self.filled)) / self.filled.size


@dataclass
class LookupTable:
    """Full multi-frequency table plus the sampling period it encodes."""

    dt: float
    config_digest: int
    grids: tuple                     # LookupGrid, ascending omega
    version: int = VERSION

    @property
    def frequencies_hz(self) -> tuple:
        return tuple(g.omega / (2.0 * np.pi) for g in self.grids)


@dataclass
class QueryStats:
    """Clamping bookkeeping for a batch of queries."""

    n_queries: int = 0
    p_clamped: int = 0
    dp_clamped: int = 0
    extrapolated: int = 0            # queries landing outside the swept region


@dataclass
class SeriesEstimate:
    """Lookup-path reconstruction of a whole pressure trace."""

    v: np.ndarray
    f_out: np.ndarray
    h: np.ndarray
    omega: np.ndarray                # per-sample blend frequency, rad/s
    stats: QueryStats = field(default_factory=QueryStats)


def _amplitude_schedule(freq_hz: float, scale: float) -> float:
    """Peak sweep amplitude (m). Constant below 5 Hz, velocity-limited above."""
    base_mm = 7.5 if freq_hz <= 5.0 else 37.5 / freq_hz
    return base_mm * 1e-3 * scale


def _characterize_frequency(cfg: SuspensionConfig, freq_hz: float, dt: float,
                            n_amplitudes: int, amplitude_scale: float,
                            static_force_n: float | None):
    """Scatter samples (p, dp, v, f_out, h) from an amplitude sweep at one tone."""
    n_eff = core.effective_polytropic_index(2.0 * np.pi * freq_hz,
                                            cfg.charge, cfg.fluid)
    offset = 0.0
    if static_force_n is not None:
        offset = oracle.static_gas_offset(cfg, static_force_n, n_eff)
    amp_max = _amplitude_schedule(freq_hz, amplitude_scale)
    amps = np.linspace(amp_max / n_amplitudes, amp_max, n_amplitudes)
    duration = 20.0 / freq_hz
    skip = int(round(1.0 / (freq_hz * dt)))  # drop the first cycle (startup)

    cols = {k: [] for k in ("p", "dp", "f", "v", "h")}
    for amp in amps:
        exc = oracle.Excitation(kind="sinusoid", amplitudes=(float(amp),),
                                frequencies=(freq_hz,), duration=duration,
                                offset=offset)
        trace = oracle.simulate_suspension(exc, cfg, dt, freq_for_n_eff=freq_hz)
        # quasi-static characterization: the fluid-inertia drop depends on
        # the flow acceleration of this particular sweep trajectory and is
        # not a function of (P, dP), so it must not be baked into the cells
        est = estimator.run(trace.to_pressure_trace(), cfg,
                            freq_override=freq_hz, flow_inertia=False)
        p1 = trace.p1
        dp = np.empty_like(p1)
        dp[1:] = np.diff(p1)
        dp[0] = dp[1]
        sl = slice(skip, None)
        cols["p"].append(p1[sl])
        cols["dp"].append(dp[sl])
        cols["v"].append(est.v[sl])
        cols["f"].append(est.f_out[sl])
        cols["h"].append(est.h_gas[sl])
    return {k: np.concatenate(v) for k, v in cols.items()}


def _grid_scatter(pts_p, pts_dp, values, axes):
    """Grid scattered sweep samples onto the shared axes.

    The sweep traces one closed loop per amplitude, so samples form
    stripes in the (P, dP) plane. Piecewise-linear (Delaunay) interpolation
    passes exactly through the sample loops and is first-order accurate
    between adjacent stripes; nodes outside the swept hull are filled from
    the nearest sample (flat extrapolation) and marked unfilled in the
    mask.
    """
    from scipy.interpolate import LinearNDInterpolator
    from scipy.spatial import Delaunay

    p_min, p_max, dp_min, dp_max = axes
    # cell-unit coordinates keep the triangulation well-scaled
    sp = (pts_p - p_min) / (p_max - p_min) * (N_P - 1)
    sdp = (pts_dp - dp_min) / (dp_max - dp_min) * (N_DP - 1)
    pts = np.column_stack([sp, sdp])

    gi, gj = np.meshgrid(np.arange(N_P), np.arange(N_DP), indexing="ij")
    nodes = np.column_stack([gi.ravel(), gj.ravel()]).astype(float)

    tri = Delaunay(pts)
    interp = LinearNDInterpolator(tri, values)
    grid_vals = interp(nodes)
    filled = ~np.isnan(grid_vals[:, 0])

    if not filled.all():
        tree = cKDTree(pts)
        _, i1 = tree.query(nodes[~filled], k=1)
        grid_vals[~filled] = values[i1]

    cells = grid_vals.astype(np.float32)
    return cells.reshape(N_P, N_DP, values.shape[1]), filled.reshape(N_P, N_DP)


def build_table(cfg: SuspensionConfig,
                settings: TableBuildSettings | None = None,
                min_coverage: float = MIN_COVERAGE) -> LookupTable:
    """Offline table generation from forward characterization sweeps.

    For each characterization frequency an amplitude sweep is simulated,
    the iterative estimator is run on the resulting pressure traces, and
    its outputs are gridded over the (P, dP) plane. Sweeping amplitude
    (not just frequency) is what fills the interior of each grid: a single
    amplitude only traces a one-dimensional loop through the plane.
    """
    settings = settings or TableBuildSettings()
    freqs = sorted(float(f) for f in settings.frequencies_hz)
    if len(freqs) < 2:
        raise ValueError("need at least two characterization frequencies")
    dt = settings.dt

    per_freq = [
        _characterize_frequency(cfg, f, dt, settings.n_amplitudes,
                                settings.amplitude_scale, settings.static_force_n)
        for f in freqs
    ]

    # shared axes: union of all sweeps, 5% span padding, dp symmetric about 0
    all_p = np.concatenate([d["p"] for d in per_freq])
    p_lo, p_hi = float(all_p.min()), float(all_p.max())
    pad = AXIS_PAD * (p_hi - p_lo)
    p_min, p_max = p_lo - pad, p_hi + pad
    dp_abs = (1.0 + AXIS_PAD) * max(
        max(abs(float(d["dp"].min())), abs(float(d["dp"].max()))) for d in per_freq)
    axes = (p_min, p_max, -dp_abs, dp_abs)

    grids = []
    for f, data in zip(freqs, per_freq):
        values = np.column_stack([data["f"], data["v"], data["h"]])
        cells, filled = _grid_scatter(data["p"], data["dp"], values, axes)
        grid = LookupGrid(omega=2.0 * np.pi * f, p_min=p_min, p_max=p_max,
                          dp_min=-dp_abs, dp_max=dp_abs,
                          cells=cells, filled=filled)
        if grid.coverage < min_coverage:
            raise TableCoverageError(
                f"{f:g} Hz grid coverage {grid.coverage:.1%} below the "
                f"{min_coverage:.0%} minimum; widen the amplitude sweep")
        grids.append(grid)

    return LookupTable(dt=dt, config_digest=cfg.digest(), grids=tuple(grids))


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------

def _blend_cells(table: LookupTable, omega: float) -> np.ndarray:
    """Cell array at an arbitrary frequency (linear blend, clamped ends)."""
    grids = table.grids
    if omega <= grids[0].omega:
        return grids[0].cells
    if omega >= grids[-1].omega:
        return grids[-1].cells
    for lo, hi in zip(grids[:-1], grids[1:]):
        if lo.omega <= omega <= hi.omega:
            w = (omega - lo.omega) / (hi.omega - lo.omega)
            return (1.0 - w) * lo.cells + w * hi.cells
    raise AssertionError("unreachable: grids are sorted")


def _bilinear(cells: np.ndarray, grid0: LookupGrid, p, dp,
              stats: QueryStats | None = None):
    """Clamped bilinear interpolation; axes taken from grid0 (shared)."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    dp = np.atleast_1d(np.asarray(dp, dtype=float))
    x = (p - grid0.p_min) / (grid0.p_max - grid0.p_min) * (N_P - 1)
    y = (dp - grid0.dp_min) / (grid0.dp_max - grid0.dp_min) * (N_DP - 1)
    if stats is not None:
        stats.n_queries += p.size
        stats.p_clamped += int(np.count_nonzero((x < 0.0) | (x > N_P - 1)))
        stats.dp_clamped += int(np.count_nonzero((y < 0.0) | (y > N_DP - 1)))
    x = np.clip(x, 0.0, N_P - 1)
    y = np.clip(y, 0.0, N_DP - 1)
    i0 = np.minimum(x.astype(np.intp), N_P - 2)
    j0 = np.minimum(y.astype(np.intp), N_DP - 2)
    fx = (x - i0)[:, None]
    fy = (y - j0)[:, None]
    c00 = cells[i0, j0]
    c10 = cells[i0 + 1, j0]
    c01 = cells[i0, j0 + 1]
    c11 = cells[i0 + 1, j0 + 1]
    out = (c00 * (1 - fx) * (1 - fy) + c10 * fx * (1 - fy)
           + c01 * (1 - fx) * fy + c11 * fx * fy)
    return out


def query(table: LookupTable, p: float, dp: float, omega: float,
          stats: QueryStats | None = None):
    """Single lookup: (f_out, v, h) at one pressure pair and blend frequency."""
    cells = _blend_cells(table, omega)
    grid0 = table.grids[0]
    out = _bilinear(cells, grid0, p, dp, stats)
    if stats is not None:
        # swept-region accounting on the nearest grid's mask
        nearest = min(table.grids, key=lambda g: abs(g.omega - omega))
        i = int(np.clip(round((p - grid0.p_min) / (grid0.p_max - grid0.p_min)
                              * (N_P - 1)), 0, N_P - 1))
        j = int(np.clip(round((dp - grid0.dp_min) / (grid0.dp_max - grid0.dp_min)
                              * (N_DP - 1)), 0, N_DP - 1))
        if not nearest.filled[i, j]:
            stats.extrapolated += 1
    f_out, v, h = (float(x) for x in out[0])
    return f_out, v, h


def _window_frequencies(samples: np.ndarray, dt: float) -> tuple:
    """(centers_idx, freqs_hz) from 1 s spectral windows hopped every 0.5 s."""
    n = samples.size
    win = max(int(round(1.0 / dt)), estimator.MIN_TRACE_LEN)
    hop = max(win // 2, 1)
    centers, freqs = [], []
    start = 0
    while True:
        stop = min(start + win, n)
        seg = samples[max(stop - win, 0):stop]
        x = seg - seg.mean()
        spec = np.abs(np.fft.rfft(x))
        spec[0] = 0.0
        if np.any(spec > 1e-9 * max(samples.max(), 1.0)):
            k = int(np.argmax(spec))
            freqs.append(k / (seg.size * dt))
        else:
            freqs.append(freqs[-1] if freqs else 0.0)
        centers.append(0.5 * (max(stop - win, 0) + stop))
        if stop >= n:
            break
        start += hop
    if not any(f > 0.0 for f in freqs):
        raise estimator.NoDominantFrequencyError(
            "constant signal: no dominant frequency in any window")
    # backfill leading zero-frequency windows from the first live one
    first = next(f for f in freqs if f > 0.0)
    freqs = [f if f > 0.0 else first for f in freqs]
    return np.asarray(centers), np.asarray(freqs)


def estimate_series(trace: estimator.PressureTrace, table: LookupTable,
                    omega: float | str = "auto") -> SeriesEstimate:
    """Reconstruct (v, f_out, h) for a whole trace through the table.

    omega may be a fixed blend frequency in rad/s or "auto", which tracks
    the dominant frequency over one-second windows hopped every half
    second and assigns each sample the nearest window's estimate.
    """
    if abs(trace.dt - table.dt) > 1e-9:
        raise TimeBaseError(
            f"trace dt {trace.dt!r} does not match table dt {table.dt!r}")
    p1 = trace.samples
    dp = np.empty_like(p1)
    dp[1:] = np.diff(p1)
    dp[0] = dp[1]

    stats = QueryStats()
    grid0 = table.grids[0]
    if isinstance(omega, str):
        if omega != "auto":
            raise ValueError("omega must be a float or 'auto'")
        centers, freqs = _window_frequencies(p1, trace.dt)
        nearest_win = np.abs(np.arange(p1.size)[:, None] - centers[None, :]).argmin(axis=1)
        omega_series = 2.0 * np.pi * freqs[nearest_win]
    else:
        omega_series = np.full(p1.size, float(omega))

    out = np.empty((p1.size, 3))
    for w in np.unique(omega_series):
        mask = omega_series == w
        cells = _blend_cells(table, float(w))
        out[mask] = _bilinear(cells, grid0, p1[mask], dp[mask], stats)

    return SeriesEstimate(v=out[:, 1], f_out=out[:, 0], h=out[:, 2],
                          omega=omega_series, stats=stats)


# ---------------------------------------------------------------------------
# Binary serialization
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<4sIQdI")
_GRID_HEADER = struct.Struct("<dII4d")


def serialize(table: LookupTable) -> bytes:
    """Little-endian binary encoding of the full table."""
    parts = [_HEADER.pack(MAGIC, table.version, table.config_digest,
                          table.dt, len(table.grids))]
    for g in table.grids:
        parts.append(_GRID_HEADER.pack(g.omega, g.cells.shape[0], g.cells.shape[1],
                                       g.p_min, g.p_max, g.dp_min, g.dp_max))
        parts.append(np.ascontiguousarray(g.cells, dtype="<f4").tobytes())
        parts.append(g.filled.astype(np.uint8).tobytes())
    return b"".join(parts)


def deserialize(blob: bytes, expected_digest: int | None = None) -> LookupTable:
    """Decode a serialized table, validating structure and (optionally) digest."""
    if len(blob) < _HEADER.size:
        if blob[:4] != MAGIC[:len(blob)]:
            raise BadMagicError("not a lookup table: bad magic")
        raise TruncatedTableError("table header truncated")
    magic, version, digest, dt, n_freq = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise BadMagicError(f"not a lookup table: bad magic {magic!r}")
    if version != VERSION:
        raise TableFormatError(f"unsupported table version {version}")
    if expected_digest is not None and digest != expected_digest:
        raise DigestMismatchError(
            "table was built for a different suspension configuration "
            f"(digest {digest:#018x}, expected {expected_digest:#018x})")
    off = _HEADER.size
    grids = []
    for _ in range(n_freq):
        if len(blob) < off + _GRID_HEADER.size:
            raise TruncatedTableError("grid header truncated")
        omega, n_p, n_dp, p_min, p_max, dp_min, dp_max = \
            _GRID_HEADER.unpack_from(blob, off)
        off += _GRID_HEADER.size
        n_cells = n_p * n_dp
        cells_bytes = n_cells * 3 * 4
        if len(blob) < off + cells_bytes + n_cells:
            raise TruncatedTableError("grid payload truncated")
        cells = np.frombuffer(blob, dtype="<f4", count=n_cells * 3,
                              offset=off).reshape(n_p, n_dp, 3).copy()
        off += cells_bytes
        filled = np.frombuffer(blob, dtype=np.uint8, count=n_cells,
                               offset=off).reshape(n_p, n_dp).astype(bool)
        off += n_cells
        grids.append(LookupGrid(omega=omega, p_min=p_min, p_max=p_max,
                                dp_min=dp_min, dp_max=dp_max,
                                cells=cells, filled=filled))
    if off != len(blob):
        raise TableFormatError(f"{len(blob) - off} trailing byte(s) after the table")
    return LookupTable(dt=dt, config_digest=digest, grids=tuple(grids),
                       version=version)


def save_table(table: LookupTable, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(table))


def load_table(path, cfg: SuspensionConfig | None = None) -> LookupTable:
    """Read a table file; with cfg given, reject digest mismatches."""
    with open(path, "rb") as fh:
        blob = fh.read()
    expected = cfg.digest() if cfg is not None else None
    return deserialize(blob, expected_digest=expected)


# ---------------------------------------------------------------------------
# Benchmark
# ---------------------------------------------------------------------------

def _stream_iterative(trace, cfg: SuspensionConfig, n_eff: float) -> np.ndarray:
    """Per-sample (streaming) evaluation of the full iterative force chain.

    This is the online deployment form: each arriving pressure sample runs
    the complete physics chain before the next sample exists, so nothing
    can be batched.
    """
    geom, fluid, fric, charge = cfg.geom, cfg.fluid, cfg.friction, cfg.charge
    dt = trace.dt
    out = np.empty(trace.n)
    h_prev = q_prev = None
    for i, p in enumerate(trace.samples):
        v_gas = core.gas_volume(p, charge, geom, n_eff)
        h = core.gas_displacement(v_gas, geom)
        v = 0.0 if h_prev is None else (h - h_prev) / dt
        q = geom.a3 * v
        dq_dt = 0.0 if q_prev is None else (q - q_prev) / dt
        h_prev, q_prev = h, q
        dp, _, _, _, _ = core.damping_pressure_drop(
            core.FlowState(q=q, dq_dt=dq_dt, v=v), geom, fluid)
        p2 = p - dp
        out[i] = (core.gas_force(p, p2, geom, fluid)
                  + core.damping_force(dp, geom)
                  + core.friction_force(v, fric,
                                        squared_exponent=cfg.use_alg1_friction))
    return out


def _stream_lookup(trace, cells: np.ndarray, grid0: LookupGrid) -> np.ndarray:
    """Per-sample (streaming) bilinear queries on a pre-blended grid.

    The grid blend only changes when the tracked frequency changes, so it
    stays outside the per-sample loop; each sample costs two index
    computations and a four-corner weighted sum.
    """
    scale_x = (N_P - 1) / (grid0.p_max - grid0.p_min)
    scale_y = (N_DP - 1) / (grid0.dp_max - grid0.dp_min)
    p_min, dp_min = grid0.p_min, grid0.dp_min
    x_hi, y_hi = float(N_P - 1), float(N_DP - 1)
    c = cells.tolist()  # native floats: fastest scalar access form
    out = np.empty(trace.n)
    p_prev = float(trace.samples[0])
    samples = trace.samples.tolist()
    for i, p in enumerate(samples):
        dp = p - p_prev
        p_prev = p
        x = (p - p_min) * scale_x
        y = (dp - dp_min) * scale_y
        if x < 0.0:
            x = 0.0
        elif x > x_hi:
            x = x_hi
        if y < 0.0:
            y = 0.0
        elif y > y_hi:
            y = y_hi
        i0 = min(int(x), N_P - 2)
        j0 = min(int(y), N_DP - 2)
        fx = x - i0
        fy = y - j0
        r0 = c[i0]
        r1 = c[i0 + 1]
        out[i] = ((1 - fx) * ((1 - fy) * r0[j0] + fy * r0[j0 + 1])
                  + fx * ((1 - fy) * r1[j0] + fy * r1[j0 + 1]))
    return out


def benchmark(table: LookupTable, cfg: SuspensionConfig,
              n_samples: int = 12000, repeats: int = 10,
              freq_hz: float = 5.0) -> dict:
    """Median per-sample runtime of the iterative vs lookup path.

    The headline numbers are streaming (one sample in, one force out, the
    controller deployment mode); batch numbers for offline whole-trace
    processing, where vectorization hides the arithmetic gap, are reported
    alongside. Both paths process the same synthetic pressure trace.
    """
    if n_samples < 10000:
        raise ValueError("benchmark needs at least 10000 samples")
    if repeats < 10:
        raise ValueError("benchmark needs at least 10 repetitions")
    dt = table.dt
    duration = max((n_samples - 1) * dt, 20.0 / freq_hz)
    amp = _amplitude_schedule(freq_hz, 0.8)
    exc = oracle.Excitation(kind="sinusoid", amplitudes=(amp,),
                            frequencies=(freq_hz,), duration=duration)
    trace = oracle.simulate_suspension(exc, cfg, dt).to_pressure_trace()
    n = trace.n
    omega = 2.0 * np.pi * freq_hz
    n_eff = core.effective_polytropic_index(omega, cfg.charge, cfg.fluid)
    cells_f = np.ascontiguousarray(_blend_cells(table, omega)[:, :, 0], dtype=float)
    grid0 = table.grids[0]

    t_iter, t_look, t_iter_batch, t_look_batch = [], [], [], []
    for _ in range(repeats):
        start = time.perf_counter()
        _stream_iterative(trace, cfg, n_eff)
        t_iter.append(time.perf_counter() - start)
        start = time.perf_counter()
        _stream_lookup(trace, cells_f, grid0)
        t_look.append(time.perf_counter() - start)
        start = time.perf_counter()
        estimator.run(trace, cfg, freq_override=freq_hz)
        t_iter_batch.append(time.perf_counter() - start)
        start = time.perf_counter()
        estimate_series(trace, table, omega=omega)
        t_look_batch.append(time.perf_counter() - start)
    us = lambda t: float(np.median(t)) / n * 1e6
    return {
        "n_samples": n,
        "repeats": repeats,
        "iterative_us_per_sample": us(t_iter),
        "lookup_us_per_sample": us(t_look),
        "speedup": us(t_iter) / us(t_look),
        "batch_iterative_us_per_sample": us(t_iter_batch),
        "batch_lookup_us_per_sample": us(t_look_batch),
        "batch_speedup": us(t_iter_batch) / us(t_look_batch),
    }
