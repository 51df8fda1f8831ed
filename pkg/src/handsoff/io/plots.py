"""Step plots of piecewise-constant controls, rendered to SVG via Jinja2."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

from jinja2 import Environment, FileSystemLoader, select_autoescape

from handsoff.core.signal import ControlSignal

__all__ = ["PlotSeries", "ControlPlotRenderer", "step_points"]

logger = logging.getLogger(__name__)

WIDTH = 800
HEIGHT = 400
_MARGIN_LEFT = 60
_MARGIN_RIGHT = 20
_MARGIN_TOP = 20
_MARGIN_BOTTOM = 50
_U_RANGE = (-1.2, 1.2)
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


@dataclass(frozen=True)
class PlotSeries:
    label: str
    control: ControlSignal
    dashed: bool = False


def step_points(u: ControlSignal) -> List[tuple]:
    """Vertices ``(t, u)`` of the step curve: two per interval."""
    points = []
    delta = u.delta
    for k, value in enumerate(u.values):
        points.append((k * delta, float(value)))
        points.append(((k + 1) * delta, float(value)))
    return points


class ControlPlotRenderer:
    """Render ``control_plot.svg.j2`` from the package ``templates/`` directory.

    Example::

        renderer = ControlPlotRenderer()
        renderer.render(
            [PlotSeries("u2 max hands-off", u2), PlotSeries("u1 L1-optimal", u1, dashed=True)],
            Path("fig.svg"),
        )
    """

    def __init__(self) -> None:
        templates_dir = Path(__file__).parent.parent / "templates"
        self._env = Environment(
            loader=FileSystemLoader(str(templates_dir)),
            autoescape=select_autoescape(enabled_extensions=("svg.j2",)),
            trim_blocks=True,
            lstrip_blocks=True,
        )

    def render_text(self, series: Sequence[PlotSeries], title: str = "control") -> str:
        """SVG document as a string.

        Raises:
            ValueError: *series* is empty or the horizons differ.
        """
        if not series:
            raise ValueError("nothing to plot")
        horizon = series[0].control.horizon
        if any(s.control.horizon != horizon for s in series):
            raise ValueError("all series must share one horizon")

        frame = {
            "left": _MARGIN_LEFT,
            "right": WIDTH - _MARGIN_RIGHT,
            "top": _MARGIN_TOP,
            "bottom": HEIGHT - _MARGIN_BOTTOM,
        }
        u_lo, u_hi = _U_RANGE

        def x_of(t: float) -> float:
            return frame["left"] + (frame["right"] - frame["left"]) * t / horizon

        def y_of(v: float) -> float:
            return frame["bottom"] - (frame["bottom"] - frame["top"]) * (v - u_lo) / (u_hi - u_lo)

        curves = []
        for index, s in enumerate(series):
            pts = " ".join(f"{x_of(t):.2f},{y_of(v):.2f}" for t, v in step_points(s.control))
            curves.append(
                {
                    "label": s.label,
                    "dashed": s.dashed,
                    "color": _COLORS[index % len(_COLORS)],
                    "points": pts,
                }
            )

        x_ticks = [
            {"pos": f"{x_of(horizon * i / 5):.2f}", "label": f"{horizon * i / 5:g}"} for i in range(6)
        ]
        y_ticks = [{"pos": y_of(v), "label": f"{v:g}"} for v in (-1.0, 0.0, 1.0)]

        template = self._env.get_template("control_plot.svg.j2")
        return template.render(
            width=WIDTH,
            height=HEIGHT,
            title=title,
            frame=frame,
            curves=curves,
            x_ticks=x_ticks,
            y_ticks=y_ticks,
        )

    def render(self, series: Sequence[PlotSeries], path: Path, title: str = "control") -> Path:
        """Write the SVG to *path* and return it."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render_text(series, title), encoding="utf-8")
        logger.debug("Wrote %d curve(s) to %s", len(series), path)
        return path
