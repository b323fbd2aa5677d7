"""Discrete blow-up declaration thresholds shared by both integrators."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class BlowupThresholds:
    # declare when inf J_x < -monitor
    monitor: float = 1e6
    # declare when max|m| exceeds linf_factor * max|m_0|
    linf_factor: float = 1e6
    # declare when a particle gap drops below spacing_ratio * dx
    spacing_ratio: float = 1e-6
    # optional cap fraction * ||m0||_1^2 / dx on the grid monitor threshold; a grid function
    # cannot push |J_x| much beyond ||m||_1^2 / dx, so a fixed 1e6 is unreachable on coarse grids
    monitor_resolution_fraction: float | None = None

    def grid_monitor(self, l1: float, dx: float) -> float:
        if self.monitor_resolution_fraction is None or l1 == 0.0:
            return self.monitor
        return min(self.monitor, self.monitor_resolution_fraction * l1 * l1 / dx)
