"""Error metrics and cycle-loop utilities shared by validation and the CLI."""

from __future__ import annotations

import numpy as np

__all__ = ["rmse", "rel_rmse", "rel_rmse_mean", "r_squared", "loop_area"]


def rmse(estimate, truth) -> float:
    e = np.asarray(estimate, dtype=float) - np.asarray(truth, dtype=float)
    return float(np.sqrt(np.mean(e * e)))


def rel_rmse(estimate, truth) -> float:
    """RMSE normalized by the reference signal's peak-to-peak range."""
    truth = np.asarray(truth, dtype=float)
    span = float(truth.max() - truth.min())
    if span == 0.0:
        raise ValueError("reference signal has zero range")
    return rmse(estimate, truth) / span


def rel_rmse_mean(estimate, truth) -> float:
    """RMSE normalized by the mean of the reference signal.

    Appropriate for signals with a large static offset, such as wheel
    loads, where the peak-to-peak range understates the working scale.
    """
    truth = np.asarray(truth, dtype=float)
    scale = abs(float(truth.mean()))
    if scale == 0.0:
        raise ValueError("reference signal has zero mean")
    return rmse(estimate, truth) / scale


def r_squared(estimate, truth) -> float:
    """Coefficient of determination, 1 - SS_res/SS_tot."""
    truth = np.asarray(truth, dtype=float)
    est = np.asarray(estimate, dtype=float)
    ss_res = float(np.sum((truth - est) ** 2))
    ss_tot = float(np.sum((truth - truth.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("reference signal is constant")
    return 1.0 - ss_res / ss_tot


def loop_area(x, y) -> float:
    """Signed area enclosed by the closed (x, y) trajectory (shoelace).

    Computed as the contour integral of y dx over the sample polygon,
    closing the curve back to the first point. Positive for a dissipative
    force-displacement loop traversed in the physical direction.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = np.diff(np.append(x, x[0]))
    y_mid = 0.5 * (y + np.roll(y, -1))
    return float(np.sum(y_mid * dx))
