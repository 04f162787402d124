import logging
import numpy as np
import numpy.typing as npt
from typing import Iterable
from .errors import GtlLabError

logger = logging.getLogger(__name__)


def check_square(A, name: str = "matrix", min_dim: int = 1) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise GtlLabError(f"{name} must be a square matrix, got shape {A.shape}")
    if A.shape[0] < min_dim:
        raise GtlLabError(f"{name} must have dimension >= {min_dim}, got {A.shape[0]}")
    return A


def fmt_float(x: float) -> str:
    """
    Locale-independent float formatting with 17 significant digits, used by every file writer so
    identical runs produce byte-identical outputs.
    """
    return format(float(x), ".17g")


def to_jsonable(obj):
    """
    Recursively turn numpy scalars/arrays (and complex numbers) into plain JSON types.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(np.real(obj)), float(np.imag(obj))]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def max_abs(values: npt.ArrayLike) -> float:
    values = np.asarray(values)
    return float(np.max(np.abs(values))) if values.size else 0.0


def drift(series: Iterable[float]) -> float:
    """
    Max |x(t) - x(0)| over a time series. NaN entries (absent values) are skipped.
    """
    arr = np.asarray(list(series), dtype=float)
    arr = arr[np.isfinite(arr)]
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr - arr[0])))


def tick_adjuster(ax):
    ax.minorticks_on()
    ax.tick_params(which="both", direction='in', top=True, right=True)


def grid_adjuster(ax, preset: str = "line"):
    """
    Activates the grid for a 2D plot

    Parameters:
    -----------
      - ax: the axes to activate the grid on
      - preset: str, "line", "dash" or "dot" for major ticks only, or "major-minor" such as
        "line-dot" to also draw the minor grid
    """
    settings = preset.split("-")

    options = {"line": "-", "dash": "--", "dot": ":"}

    if not all(grid_type in options for grid_type in settings) or len(settings) > 2:
        logger.warning(f"invalid grid option '{preset}' requested. Types are only 'line', 'dash', "
                       "and 'dot'. Disabling grid...")
        return None

    ax.grid(which="major", linestyle=options[settings[0]], linewidth=0.5, c="grey", alpha=0.6)
    if len(settings) == 2:
        ax.grid(which="minor", linestyle=options[settings[1]], linewidth=0.25, c="grey", alpha=0.5)
