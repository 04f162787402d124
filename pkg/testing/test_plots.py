import logging
import matplotlib
matplotlib.use("Agg")
import pytest
from gtllab.dynamics import FlowId, IntegratorConfig, integrate
from gtllab.errata import N3_FIXTURE
from gtllab.plots import DriftFigure, drift_figure, drift_limits
from gtllab.states import N3State

PNG_MAGIC = b"\x89PNG"


@pytest.fixture(scope="module")
def trajectory():
    return integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig.from_preset("default", t_end=1.0))


def test_writes_png(trajectory, tmp_path):
    path = drift_figure(trajectory, tmp_path / "drift.png", dpi=50)
    assert path.read_bytes().startswith(PNG_MAGIC)


def test_linear_axis_and_pdf(trajectory, tmp_path):
    path = drift_figure(trajectory, tmp_path / "drift.pdf", names=["H1", "H2"], logy=False, grid_style=None)
    assert path.read_bytes().startswith(b"%PDF")


def test_unknown_style(caplog):
    with caplog.at_level(logging.WARNING, logger="gtllab.plots"):
        fig = DriftFigure(style="poster")
    assert "poster is not a figure preset" in caplog.text
    assert fig.style["figure.figsize"] == (6, 4)


def test_unknown_series(trajectory, caplog):
    fig = DriftFigure()
    with caplog.at_level(logging.WARNING, logger="gtllab.plots"):
        fig.add_trajectory(trajectory, ["H1", "H9"])
    assert "H9 is not a monitored series" in caplog.text
    assert [name for *_, name in fig._curves] == ["H1"]


def test_undefined_series_is_skipped(tmp_path, caplog):
    # u = 0 stays 0, so C2 = a1 a2/u - p2 is undefined along the whole run
    traj = integrate(N3State(1.0, 2.0, 3.0, 0.5, 0.5, 0.0), FlowId.N3,
                     IntegratorConfig.from_preset("default", t_end=0.2))
    fig = DriftFigure()
    with caplog.at_level(logging.INFO, logger="gtllab.plots"):
        fig.add_trajectory(traj, ["H1", "C2"])
    assert "C2 is undefined at t=0" in caplog.text
    assert fig.export(tmp_path / "drift.png").exists()


def test_log_limits_never_collapse():
    low, high = drift_limits([1e-18], [1e-18], log=True)
    assert high > low


def test_log_limits_snap_to_decades():
    assert drift_limits([3e-12, 2e-9], [4e-8, 1e-10], log=True) == pytest.approx((1e-12, 1e-7))


def test_linear_limits_start_at_zero():
    assert drift_limits([1e-9], [2e-9], log=False) == pytest.approx((0.0, 2.1e-9))
    assert drift_limits([0.0], [0.0], log=False) == (0.0, 1.0)
