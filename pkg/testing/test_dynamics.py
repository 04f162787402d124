import logging
import numpy as np
import pytest
from scipy.integrate import solve_ivp
from gtllab.checks import random_gtl, random_n3
from gtllab.dynamics import (C2_U_FLOOR, FlowId, IntegratorConfig, cdw_rhs_via_n3, classic_ab_rhs, default_monitors,
                             integrate, printed_vs_oracle, reduction_check, rhs, rhs_from_lax, write_csv, write_stats)
from gtllab.errata import GTL_FIXTURE, N3_FIXTURE, N3_ISOSPECTRAL_FIXTURE, N3Q_FIXTURE, TODA_FIXTURE
from gtllab.errors import (ConfigError, DomainError, IntegrationError, KindMismatchError, LaxClosureError,
                           PreconditionError)
from gtllab.lax import LaxRep
from gtllab.model import cdw_from_n3, flaschka_from_qp, n3_from_n3q
from gtllab.poisson import c4_series
from gtllab.states import CdwState, N3State, TodaState

FD = 1e-6


def along(fn, state, flow):
    """
    d/dt fn(state(t)) by a central difference along the flow's vector field.
    """
    x = state.to_vector(); v = rhs(state, flow)
    plus = np.asarray(fn(state.with_vector(x + FD*v)), dtype=float)
    minus = np.asarray(fn(state.with_vector(x - FD*v)), dtype=float)
    return (plus - minus)/(2*FD)


class TestVectorFields:
    def test_unknown_flow(self):
        with pytest.raises(ConfigError, match="Unknown flow"):
            rhs(N3_FIXTURE, "kdv")

    def test_kind_mismatch(self):
        with pytest.raises(KindMismatchError):
            rhs(N3_FIXTURE, FlowId.GTL)

    def test_flaschka_variant_mismatch(self):
        with pytest.raises(KindMismatchError):
            rhs(flaschka_from_qp(TODA_FIXTURE, "a_b"), FlowId.TL_ALPHA_BETA)

    def test_open_chain_momentum_sum(self):
        assert np.sum(rhs(TODA_FIXTURE, FlowId.TL_QP)[TODA_FIXTURE.N:]) == pytest.approx(0.0, abs=1e-15)

    def test_n3_momentum_telescopes(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            assert abs(np.sum(rhs(random_n3(rng), FlowId.N3)[:3])) <= 1e-14

    @pytest.mark.parametrize("variant, flow", [("alpha_beta", FlowId.TL_ALPHA_BETA), ("a_b", FlowId.TL_AB)])
    def test_flaschka_chain_rule(self, variant, flow):
        expected = along(lambda s: flaschka_from_qp(s, variant).to_vector(), TODA_FIXTURE, FlowId.TL_QP)
        np.testing.assert_allclose(rhs(flaschka_from_qp(TODA_FIXTURE, variant), flow), expected, atol=1e-8)

    def test_q_form_chain_rule(self):
        expected = along(lambda s: n3_from_n3q(s).to_vector(), N3Q_FIXTURE, FlowId.N3_Q)
        np.testing.assert_allclose(rhs(n3_from_n3q(N3Q_FIXTURE), FlowId.N3), expected, atol=1e-8)

    def test_n3_fixed_point(self):
        np.testing.assert_array_equal(rhs(N3State(1, 2, 3, 0, 0, 0), FlowId.N3), np.zeros(6))

    def test_cdw_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            c = cdw_from_n3(random_n3(rng))
            np.testing.assert_allclose(rhs(c, FlowId.CDW), cdw_rhs_via_n3(c), atol=1e-12)

    def test_cdw_commutator_oracle_is_not_closed(self):
        with pytest.raises(LaxClosureError) as err:
            rhs_from_lax(cdw_from_n3(N3_FIXTURE), LaxRep.CDW)
        assert (err.value.row, err.value.col, err.value.order) == (1, 0, "LM")

    def test_cdw_oracle_kind(self):
        with pytest.raises(KindMismatchError):
            cdw_rhs_via_n3(N3_FIXTURE)
        with pytest.raises(KindMismatchError):
            rhs_from_lax(N3_FIXTURE, LaxRep.CDW)

    def test_printed_cdw_couplings_differ(self):
        c = cdw_from_n3(N3_FIXTURE)
        assert np.max(np.abs(rhs(c, FlowId.CDW, as_printed=True) - rhs(c, FlowId.CDW))) > 0.1

    def test_cdw_negative_radicand(self):
        with pytest.raises(DomainError, match="radicand"):
            rhs(CdwState((0.1, 0.2, 0.3), 1.0, 0.5, -0.25), FlowId.CDW)

    def test_oracle_without_projection(self):
        with pytest.raises(KindMismatchError):
            rhs_from_lax(N3_FIXTURE, LaxRep.N3_Q)


class TestGeneralizedLattice:
    def test_u_v_rates(self):
        d = rhs(GTL_FIXTURE, FlowId.GTL)
        # (p_-1 - p_1) u and (p_-1 - p_1) v
        assert d[-2] == pytest.approx(-0.12)
        assert d[-1] == pytest.approx(-0.18)

    def test_printed_vs_oracle(self):
        rows = {r["coordinate"]: r for r in printed_vs_oracle(GTL_FIXTURE)}
        assert rows["u"]["printed"] == pytest.approx(-0.15)
        assert rows["u"]["difference"] == pytest.approx(-0.03)
        assert rows["v"]["difference"] == pytest.approx(-0.045)
        assert rows["p[0]"]["difference"] == pytest.approx(0.0, abs=1e-14)

    def test_reduction(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            s = random_gtl(rng, N=int(rng.integers(1, 4)), classic=True)
            assert reduction_check(s) < 1e-13

    def test_reduction_needs_classic_state(self):
        with pytest.raises(PreconditionError):
            reduction_check(GTL_FIXTURE)

    def test_classic_rhs_freezes_u_v(self):
        assert tuple(classic_ab_rhs(GTL_FIXTURE)[-2:]) == (0.0, 0.0)

    def test_symmetric_state_matches_n3(self):
        from gtllab.model import gtl_from_n3
        g = rhs(gtl_from_n3(N3_FIXTURE), FlowId.GTL)
        n = rhs(N3_FIXTURE, FlowId.N3)
        # p, a, u slots of the embedded state
        np.testing.assert_allclose(g[[0, 1, 2, 3, 4, 7]], n, atol=1e-12)


class TestIntegratorConfig:
    def test_preset(self):
        cfg = IntegratorConfig.from_preset("fast", t_end=2.0)
        assert cfg.method == "rk4_fixed" and cfg.t_end == 2.0

    def test_none_overrides_are_ignored(self):
        assert IntegratorConfig.from_preset("default", dt=None).dt == 1e-2

    def test_unknown_preset_warns(self, caplog):
        with caplog.at_level(logging.WARNING):
            cfg = IntegratorConfig.from_preset("turbo")
        assert cfg == IntegratorConfig()
        assert "not an integrator preset" in caplog.text

    @pytest.mark.parametrize("kwargs", [{"method": "euler"}, {"atol": 1.0}, {"rtol": 1e-16}, {"dt": 0.0},
                                        {"t_end": -1.0}])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            IntegratorConfig(**kwargs)


class TestIntegrate:
    def test_conserves_invariants(self):
        traj = integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig(t_end=2.0))
        drifts = traj.drifts()
        assert traj.times[-1] == 2.0
        assert max(drifts[f"H{i}"] for i in (1, 2, 3)) < 1e-7
        assert max(drifts[f"lam{i}"] for i in (1, 2, 3)) < 1e-6
        assert drifts["C2"] < 1e-6

    def test_isospectral_fixture(self):
        traj = integrate(N3_ISOSPECTRAL_FIXTURE, FlowId.N3, IntegratorConfig(atol=1e-10, rtol=1e-10, t_end=10.0))
        drifts = traj.drifts()
        assert traj.times[-1] == 10.0
        assert max(drifts[f"lam{i}"] for i in (1, 2, 3)) <= 1e-6
        assert max(drifts[f"H{i}"] for i in (1, 2, 3)) <= 1e-7
        assert max(drifts[f"C{i}"] for i in (1, 2, 3)) <= 1e-6
        # u decays toward 0, C2 is reported absent once |u| reaches the floor
        c2 = np.asarray(traj.series["C2"])
        assert c2[0] == pytest.approx(2.0)
        assert abs(traj.final.u) <= C2_U_FLOOR and np.isnan(c2[-1])

    def test_stats(self):
        traj = integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig(t_end=1.0), monitors=[])
        assert traj.stats["steps"] == len(traj.times) - 1
        assert traj.stats["rhs_evaluations"] >= 7*traj.stats["steps"]
        assert traj.series == {}

    def test_fixed_point_stays_put(self):
        s = N3State(1, 2, 3, 0, 0, 0)
        traj = integrate(s, FlowId.N3, IntegratorConfig(t_end=1.0))
        np.testing.assert_array_equal(traj.final.to_vector(), s.to_vector())
        assert all(np.isnan(traj.series["C2"]))
        assert traj.drifts()["C2"] == 0.0

    def test_rk4_is_fourth_order(self):
        ref = integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig.from_preset("reference", t_end=1.0), monitors=[]).final
        errors = []
        for dt in (1e-2, 5e-3):
            cfg = IntegratorConfig.from_preset("fast", dt=dt, t_end=1.0)
            final = integrate(N3_FIXTURE, FlowId.N3, cfg, monitors=[]).final
            errors.append(np.max(np.abs(final.to_vector() - ref.to_vector())))
        assert 14.0 <= errors[0]/errors[1] <= 18.0

    def test_rk4_lands_on_t_end(self):
        traj = integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig.from_preset("fast", dt=0.3, t_end=1.0),
                         monitors=[])
        assert traj.times[-1] == 1.0 and len(traj.times) == 5

    def test_max_steps(self):
        with pytest.raises(IntegrationError) as err:
            integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig(t_end=1.0, max_steps=1), monitors=[])
        assert err.value.last_good_time < 1.0

    def test_rk4_max_steps(self):
        cfg = IntegratorConfig(method="rk4_fixed", dt=0.01, t_end=1.0, max_steps=10)
        with pytest.raises(IntegrationError):
            integrate(N3_FIXTURE, FlowId.N3, cfg)

    def test_toda_energy(self):
        traj = integrate(TODA_FIXTURE, FlowId.TL_QP, IntegratorConfig(t_end=2.0))
        assert traj.drifts()["H"] < 1e-7

    def test_matches_scipy_reference(self):
        cfg = IntegratorConfig.from_preset("tight", t_end=2.0)
        traj = integrate(N3_FIXTURE, FlowId.N3, cfg, monitors=[])
        ref = solve_ivp(lambda t, y: rhs(N3_FIXTURE.with_vector(y), FlowId.N3), (0.0, 2.0),
                        N3_FIXTURE.to_vector(), method="DOP853", rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(traj.final.to_vector(), ref.y[:, -1], atol=1e-8)

    def test_periodic_momentum(self):
        s = TodaState((0.1, -0.2, 0.3), (0.5, 0.0, -0.1), "periodic")
        traj = integrate(s, FlowId.TL_QP, IntegratorConfig(t_end=1.0), monitors=[])
        assert np.sum(traj.final.p) == pytest.approx(0.4, abs=1e-9)

    def test_gtl_monitor(self):
        traj = integrate(GTL_FIXTURE, FlowId.GTL, IntegratorConfig(t_end=1.0))
        assert {"H1", "H2", "H3", "C1", "C3"} <= set(traj.series)
        assert traj.drifts()["H2"] < 1e-7

    def test_cdw_monitor_and_half_time(self):
        c = cdw_from_n3(N3_FIXTURE)
        full = integrate(c, FlowId.CDW, IntegratorConfig.from_preset("tight", t_end=2.0))
        half = integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig.from_preset("tight", t_end=1.0), monitors=[])
        np.testing.assert_allclose(full.final.to_vector(), cdw_from_n3(half.final).to_vector(), atol=1e-8)
        assert full.drifts()["H2"] < 1e-7

    def test_c4_series(self):
        traj = integrate(N3Q_FIXTURE, FlowId.N3_Q, IntegratorConfig(t_end=0.5))
        c4 = c4_series(traj)
        assert c4.shape == (len(traj.times),)
        assert c4[0] == pytest.approx(0.8*0.6)
        assert "C4" in traj.series

    def test_c4_series_needs_q_states(self):
        with pytest.raises(KindMismatchError):
            c4_series(integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig(t_end=0.1), monitors=[]))

    def test_default_monitors(self):
        assert default_monitors("tl_alpha_beta") == []


class TestExport:
    def test_csv_header(self, tmp_path):
        traj = integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig(t_end=0.5))
        write_csv(traj, tmp_path/"run.csv")
        lines = (tmp_path/"run.csv").read_text().splitlines()
        assert lines[0] == "t,p1,p2,p3,a1,a2,u,H1,H2,H3,C1,C2,C3,lam1,lam2,lam3"
        assert len(lines) == len(traj.times) + 1
        assert lines[1].startswith("0,0.29999999999999999,")

    def test_absent_values_are_empty(self, tmp_path):
        traj = integrate(N3State(1, 2, 3, 0, 0, 0), FlowId.N3, IntegratorConfig(t_end=0.1))
        write_csv(traj, tmp_path/"rest.csv")
        row = (tmp_path/"rest.csv").read_text().splitlines()[1].split(",")
        header = (tmp_path/"rest.csv").read_text().splitlines()[0].split(",")
        assert row[header.index("C2")] == "" and row[header.index("C3")] == ""

    def test_deterministic(self, tmp_path):
        for name in ("a.csv", "b.csv"):
            write_csv(integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig(t_end=1.0)), tmp_path/name)
        assert (tmp_path/"a.csv").read_bytes() == (tmp_path/"b.csv").read_bytes()

    def test_stats_json(self, tmp_path):
        import json
        traj = integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig(t_end=0.5))
        write_stats(traj, tmp_path/"run.stats.json")
        doc = json.loads((tmp_path/"run.stats.json").read_text())
        assert doc["flow"] == "n3" and doc["t_end"] == 0.5
        assert set(doc["integrator_stats"]) == {"steps", "rejections", "rhs_evaluations"}
        assert "H2" in doc["max_drift"]
