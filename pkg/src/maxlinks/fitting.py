"""Two-segment linear least squares for average link-count curves.

The average link count grows roughly linearly with the number of pairs K,
with one slope while K is at or below the antenna count M (array gain
regime) and a flatter slope beyond it (selection gain regime). The two
segments are fitted independently; no continuity is imposed at K = M.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True, eq=False)
class FitParams:
    """Per-segment intercepts/slopes and residuals of the piecewise fit."""

    a1: float                  # intercept, K <= M
    b1: float                  # slope, K <= M
    a2: float                  # intercept, K >= M + 1
    b2: float                  # slope, K >= M + 1
    residuals_low: np.ndarray
    residuals_high: np.ndarray

    def predict(self, k, rx_antennas: int):
        k = np.asarray(k, dtype=float)
        low = self.a1 + self.b1 * k
        high = self.a2 + self.b2 * k
        return np.where(k <= rx_antennas, low, high)


def _ols_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    return float(intercept), float(slope)


def fit_two_stage(points: Sequence[tuple[float, float]],
                  rx_antennas: int) -> FitParams:
    """Fit the two-segment line to (K, average link count) points.

    The low segment uses points with K <= rx_antennas, the high segment the
    rest. With a single receive antenna the low segment is the lone K = 1
    point, so its intercept is pinned to 0 and the slope is the value there.
    """
    if rx_antennas < 1:
        raise ParameterError("rx_antennas must be >= 1")
    pts = sorted((float(k), float(c)) for k, c in points)
    if len(pts) != len({k for k, _ in pts}):
        raise ParameterError("duplicate K values in fit input")
    x = np.array([k for k, _ in pts])
    y = np.array([c for _, c in pts])
    low = x <= rx_antennas
    x_low, y_low = x[low], y[low]
    x_high, y_high = x[~low], y[~low]

    if rx_antennas == 1:
        if len(x_low) != 1 or x_low[0] != 1:
            raise ParameterError("single-antenna fit needs exactly the K=1 point "
                                 "in the low segment")
        a1, b1 = 0.0, float(y_low[0])
    else:
        if len(x_low) < 2:
            raise ParameterError(
                f"low segment needs at least 2 points, got {len(x_low)}")
        a1, b1 = _ols_line(x_low, y_low)
    if len(x_high) < 2:
        raise ParameterError(
            f"high segment needs at least 2 points, got {len(x_high)}")
    a2, b2 = _ols_line(x_high, y_high)

    return FitParams(
        a1=a1, b1=b1, a2=a2, b2=b2,
        residuals_low=y_low - (a1 + b1 * x_low),
        residuals_high=y_high - (a2 + b2 * x_high),
    )
