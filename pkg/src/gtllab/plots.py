"""
File-only figures of trajectory diagnostics. Figures are built on matplotlib's object interface
and written with savefig; nothing is ever shown on screen.
"""
import logging
import matplotlib as mpl
from matplotlib.figure import Figure
import numpy as np
from pathlib import Path
from typing import List, Optional, Sequence
from .dynamics import Trajectory
from .presets.figures import FIGURE_PRESETS
from .utils import grid_adjuster, tick_adjuster

logger = logging.getLogger(__name__)

DRIFT_FLOOR = 1e-18


def drift_limits(lows: Sequence[float], highs: Sequence[float], log: bool = True) -> tuple:
    """
    y-limits of a drift axis. Log axes snap outward to whole decades and span at least one.
    """
    low, high = min(lows), max(highs)
    if log:
        low = 10.0**np.floor(np.log10(low)); high = 10.0**np.ceil(np.log10(high))
        return low, max(high, 10.0*low)
    return 0.0, 1.05*high if high > 0 else 1.0


class DriftFigure:
    """
    |x(t) - x(0)| of monitored quantities versus time.
    """
    def __init__(self,
                 logy: bool = True,
                 grid_style: Optional[str] = "line-dot",
                 title: Optional[str] = None,
                 dpi: int = 200,
                 style: "str | dict" = "default"):
        """
        Parameters:
        -----------
          - logy: logarithmic drift axis (drifts are floored at DRIFT_FLOOR so zeros stay visible)
          - grid_style: None for no grid, otherwise a utils.grid_adjuster preset
          - title: figure title
          - dpi: resolution of the written file
          - style: preset name from FIGURE_PRESETS or a dict of rcParams
        """
        self.logy = logy; self.grid_style = grid_style
        self.title = title; self.dpi = dpi

        if isinstance(style, str):
            if style not in FIGURE_PRESETS:
                logger.warning(f"{style} is not a figure preset, using 'default'. Presets: {list(FIGURE_PRESETS)}")
            self.style = FIGURE_PRESETS.get(style, FIGURE_PRESETS["default"])
        else:
            self.style = style

        self._curves: List[tuple] = []

    def add_trajectory(self, traj: Trajectory, names: Optional[Sequence[str]] = None):
        """
        Queue one curve per monitored series (all of them when names is None).
        """
        names = list(traj.series) if names is None else list(names)
        t = np.asarray(traj.times)
        for name in names:
            if name not in traj.series:
                logger.warning(f"{name} is not a monitored series of this trajectory, skipping it")
                continue
            x = np.asarray(traj.series[name], dtype=float)
            if not np.isfinite(x[0]):
                logger.info(f"{name} is undefined at t=0, skipping it")
                continue
            self._curves.append((t, np.abs(x - x[0]), name))

    def export(self, path: "str | Path") -> Path:
        path = Path(path)
        with mpl.rc_context(self.style):
            fig = Figure(dpi=self.dpi)
            ax = fig.add_subplot()
            tick_adjuster(ax)
            if self.grid_style:
                grid_adjuster(ax, self.grid_style)

            lows, highs = [], []
            for t, y, name in self._curves:
                y = np.maximum(y, DRIFT_FLOOR) if self.logy else y
                ax.plot(t, y, label=name, linewidth=1.2)
                finite = y[np.isfinite(y)]
                if finite.size:
                    lows.append(finite.min()); highs.append(finite.max())

            if self.logy:
                ax.set_yscale("log")
            if lows:
                ax.set_ylim(*drift_limits(lows, highs, log=self.logy))
            ax.set_xlabel(r"$t$"); ax.set_ylabel(r"$|x(t) - x(0)|$")
            if self.title:
                ax.set_title(self.title)
            if self._curves:
                ax.legend(loc="best", frameon=False)

            fig.savefig(path, bbox_inches="tight", facecolor="white")
        return path


def drift_figure(trajectory: Trajectory, path: "str | Path", names: Optional[Sequence[str]] = None,
                 **kwargs) -> Path:
    """
    Write the drift figure of a trajectory to path (format from the suffix). kwargs go to DriftFigure.
    """
    fig = DriftFigure(title=kwargs.pop("title", f"{trajectory.flow} invariant drift"), **kwargs)
    fig.add_trajectory(trajectory, names)
    return fig.export(path)
