import io
import json
import pytest
from gtllab.checks import SUITES, run_checks
from gtllab.errors import ConfigError
from gtllab.presets.checks import CHECK_SUITES


@pytest.fixture(scope="module")
def report():
    return run_checks(seed=0)


def test_suite_registry():
    assert list(SUITES) == CHECK_SUITES


def test_empty_list():
    with pytest.raises(ConfigError, match="empty"):
        run_checks([" ", ""])


def test_unknown_suite():
    with pytest.raises(ConfigError, match="unknown checks"):
        run_checks(["lax", "spectral"])


def test_full_run_passes(report):
    failed = [r.name for r in report.results if r.status == "fail"]
    assert failed == []
    assert report.passed
    assert len(report.errata) == 18


def test_every_suite_contributes(report):
    prefixes = {r.name.split(".")[0] for r in report.results}
    assert prefixes == set(CHECK_SUITES)


def test_rmatrix_rows_are_measured():
    report = run_checks(["rmatrix"], errata=False)
    assert [r.status for r in report.results] == ["measured"]*8
    assert all(r.tolerance is None for r in report.results)
    assert report.errata == []


def test_subset_is_deterministic():
    first = run_checks(["reduction", "nls"], seed=3, errata=False).to_dict()
    second = run_checks(["reduction", "nls"], seed=3, errata=False).to_dict()
    assert first == second
    assert first["passed"]


def test_render(report):
    out = io.StringIO()
    report.render(out)
    text = out.getvalue()
    assert text.startswith("Checks (seed 0): PASS")
    assert "poisson.printed_kappa_gap" in text


def test_write_json(report, tmp_path):
    doc = json.loads(report.write_json(tmp_path / "checks.json").read_text())
    assert doc["seed"] == 0 and doc["passed"] is True
    assert {r["name"] for r in doc["results"]} == {r.name for r in report.results}
    assert len(doc["errata"]) == 18


def test_frame(report):
    df = report.frame()
    assert list(df.columns) == ["name", "status", "value", "tolerance", "detail"]
    assert df.loc[df["name"] == "flow.steps", "tolerance"].isna().all()


def test_rmatrix_classic_fixtures():
    rows = {r.name: r.value for r in run_checks(["rmatrix"], errata=False).results}
    assert rows["rmatrix.classic_zero_rt"] == pytest.approx(4.0)
    assert rows["rmatrix.classic_zero_sum"] == pytest.approx(0.0, abs=1e-12)
    assert rows["rmatrix.classic_unit_rt"] == pytest.approx(2.0)
    assert rows["rmatrix.classic_unit_sum"] == pytest.approx(0.0, abs=1e-12)


def test_convergence_rows(report):
    rows = {r.name: r for r in report.results if r.name.startswith("convergence.")}
    assert set(rows) == {"convergence.rk4_ratio_low", "convergence.rk4_ratio_high"}
    assert rows["convergence.rk4_ratio_low"].tolerance == 14.0
    assert rows["convergence.rk4_ratio_high"].tolerance == 18.0
    assert 14.0 <= rows["convergence.rk4_ratio_low"].value <= 18.0


def test_flow_runs_the_isospectral_fixture(report):
    rows = {r.name: r for r in report.results if r.name.startswith("flow.")}
    assert "u = 0.5" in rows["flow.eigenvalue_drift"].detail
    assert rows["flow.casimir_drift"].status == "pass"
    assert 0.0 < rows["flow.c2_cutoff_time"].value < 10.0


def test_tau_third_order(report):
    rows = {r.name: r for r in report.results if r.name.startswith("tau.")}
    assert rows["tau.epsilon_slope"].tolerance == pytest.approx(3.8)
    assert rows["tau.exact_seed_corrections"].value <= 1e-10


def test_cdw_rows(report):
    rows = {r.name: r for r in report.results if r.name.startswith("lax.cdw")}
    assert rows["lax.cdw_via_n3"].status == "pass"
    assert rows["lax.cdw_printed_closure"].status == "measured"
    assert rows["lax.cdw_printed_closure"].value == pytest.approx(0.4)
