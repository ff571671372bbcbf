"""Iterative suspension-force estimator driven by the gas-pressure signal.

Pipeline: identify the dominant excitation frequency from the pressure
spectrum, fix the effective polytropic index, then reconstruct per sample
the gas volume/displacement, piston velocity and flow, the hydraulic
pressure-drop chain, friction, and the total output force.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sp_signal

from . import core
from .config import SuspensionConfig

__all__ = [
    "PressureTrace",
    "ForceBreakdown",
    "NoDominantFrequencyError",
    "estimate_peak_frequency",
    "run",
]

MIN_TRACE_LEN = 16


class NoDominantFrequencyError(ValueError):
    """The pressure signal has no usable non-DC spectral peak."""


@dataclass(frozen=True)
class PressureTrace:
    """Uniformly sampled gas-chamber pressure signal, the sole runtime input."""

    dt: float
    samples: np.ndarray            # Pa
    t0_temperature: float = 30.0   # degC

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        if self.dt <= 0.0:
            raise ValueError("sampling period must be positive")
        if self.samples.ndim != 1 or self.samples.size < MIN_TRACE_LEN:
            raise ValueError(f"need a 1-D trace of at least {MIN_TRACE_LEN} samples")
        if np.any(self.samples <= 0.0):
            raise ValueError("pressure samples must all be positive")

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n) * self.dt


@dataclass
class ForceBreakdown:
    """Per-sample estimator output plus run metadata."""

    f_gas: np.ndarray
    f_damp: np.ndarray
    f_fric: np.ndarray
    f_out: np.ndarray
    p2: np.ndarray
    v: np.ndarray
    h_total: np.ndarray
    a: np.ndarray
    n_eff: float
    f_peak: float
    cavitation_count: int = 0
    clamp_count: int = 0
    h_gas: np.ndarray | None = field(default=None, repr=False)


def estimate_peak_frequency(trace: PressureTrace) -> float:
    """Frequency of the largest non-DC DFT bin of the mean-removed signal."""
    x = trace.samples - trace.samples.mean()
    spectrum = np.abs(np.fft.rfft(x))
    spectrum[0] = 0.0
    if not np.any(spectrum > 1e-9 * max(trace.samples.max(), 1.0)):
        raise NoDominantFrequencyError("constant signal: no dominant frequency")
    k = int(np.argmax(spectrum))
    return k / (trace.n * trace.dt)


def lowpass(samples: np.ndarray, dt: float, cutoff_hz: float) -> np.ndarray:
    """Zero-phase 2nd-order Butterworth low-pass, mirroring the bench filter."""
    b, a = sp_signal.butter(2, cutoff_hz, fs=1.0 / dt)
    return sp_signal.filtfilt(b, a, samples)


def run(trace: PressureTrace, cfg: SuspensionConfig,
        freq_override: float | None = None,
        flow_inertia: bool = True) -> ForceBreakdown:
    """Full iterative reconstruction of the suspension output force.

    freq_override supplies the excitation frequency in Hz, skipping the
    spectral estimate (used when the excitation is known exactly).
    flow_inertia=False zeroes the fluid-inertia pressure drop, leaving
    only terms that are pure functions of the pressure pair; the lookup
    table is characterized this way because the inertia term depends on
    the flow acceleration and is therefore specific to the trajectory
    that produced it, not to the (P, dP) cell it lands in.
    """
    import dataclasses

    p1 = trace.samples
    if cfg.lowpass_hz is not None:
        p1 = lowpass(p1, trace.dt, cfg.lowpass_hz)

    f_peak = float(freq_override) if freq_override is not None \
        else estimate_peak_frequency(trace)
    omega = 2.0 * np.pi * f_peak
    charge = dataclasses.replace(cfg.charge, t0=trace.t0_temperature)
    n_eff = core.effective_polytropic_index(omega, charge, cfg.fluid)

    geom, fluid = cfg.geom, cfg.fluid
    v_gas = core.gas_volume(p1, charge, geom, n_eff)
    h_gas = core.gas_displacement(v_gas, geom)

    # Compression-positive velocity; h_gas already grows in compression.
    v = core.differentiate(h_gas, trace.dt, sign=+1.0)
    q = geom.a3 * v
    if flow_inertia:
        dq_dt = core.differentiate(q, trace.dt)
        dq_dt[0] = 0.0  # no flow history at the first sample
    else:
        dq_dt = np.zeros_like(q)

    flow = core.FlowState(q=q, dq_dt=dq_dt, v=v)
    dp_total, _, _, _, _ = core.damping_pressure_drop(flow, geom, fluid)
    p2 = p1 - dp_total
    cavitation_count = int(np.count_nonzero(p2 <= 0.0))

    f_gas = core.gas_force(p1, p2, geom, fluid)
    f_damp = core.damping_force(dp_total, geom)
    f_fric = core.friction_force(v, cfg.friction,
                                 squared_exponent=cfg.use_alg1_friction)
    f_out = f_gas + f_damp + f_fric

    dv_oil = core.oil_compression(dp_total, geom, fluid)
    h_total = core.total_travel(h_gas, v_gas, dv_oil, geom)
    a = core.differentiate(v, trace.dt)

    return ForceBreakdown(
        f_gas=f_gas, f_damp=f_damp, f_fric=f_fric, f_out=f_out,
        p2=p2, v=v, h_total=h_total, a=a,
        n_eff=float(n_eff), f_peak=f_peak,
        cavitation_count=cavitation_count, h_gas=h_gas)
