import json
import numpy as np
import pytest
from gtllab.core import STATE_KINDS
from gtllab.errors import ConfigError, DomainError
from gtllab.model import (cdw_from_n3, flaschka_from_qp, gtl_from_n3, n3_from_cdw, n3_from_n3q, qn_from_tau,
                          state_from_dict, state_to_dict, toda_from_flaschka)
from gtllab.states import CdwState, FlaschkaState, GtlState, N3QState, N3State, PQState, TodaState


TODA = TodaState((0.3, -0.1, 0.4, 0.0), (0.5, -0.2, 0.1, -0.4))


class TestStates:
    def test_every_kind_round_trips_through_json(self):
        states = [TODA, flaschka_from_qp(TODA), GtlState(1, (1, 2, 3), (0.5, 0.6), (0.7, 0.8), 0.1, 0.2),
                  N3State(0.3, -0.1, 0.2, 1.0, 0.7, 0.5), N3QState((0.1, 0.2, 0.3), (1, 2, 3), 0.4, 0.5, 0.7),
                  PQState((1, 2, 3, 4), (0.1, 0.2, 0.3, 0.4)), CdwState((0.1, 0.2, 0.3), 1.0, 0.5, 0.25, -1)]
        for s in states:
            doc = json.loads(json.dumps(state_to_dict(s)))
            back = state_from_dict(doc)
            assert type(back) is type(s)
            np.testing.assert_array_equal(back.to_vector(), s.to_vector())

    def test_registered_kinds(self):
        assert set(STATE_KINDS) == {"toda", "flaschka", "gtl", "n3", "n3q", "pq", "cdw"}

    def test_unknown_kind(self):
        with pytest.raises(ConfigError, match="Unknown state kind"):
            state_from_dict({"kind": "kdv"})

    def test_missing_field(self):
        with pytest.raises(ConfigError, match="Malformed"):
            state_from_dict({"kind": "n3", "p": [0, 0, 0], "a": [1, 1]})

    def test_not_an_object(self):
        with pytest.raises(ConfigError):
            state_from_dict([1, 2, 3])

    def test_gtl_lengths_checked(self):
        with pytest.raises(ConfigError):
            GtlState(2, (1, 2, 3), (0.5, 0.6), (0.7, 0.8))

    def test_non_finite_coordinates(self):
        with pytest.raises(DomainError):
            N3State(0.0, 0.0, float("nan"), 1.0, 1.0, 0.0)

    @pytest.mark.parametrize("make", [lambda x: TodaState((0.0, x), (0.0, 0.0)),
                                      lambda x: TodaState((0.0, 0.0), (x, 0.0), "periodic"),
                                      lambda x: FlaschkaState("alpha_beta", (x,), (0.0, 0.0)),
                                      lambda x: FlaschkaState("a_b", (0.5,), (0.0, x))])
    @pytest.mark.parametrize("bad", [float("nan"), float("inf")])
    def test_classic_states_reject_non_finite(self, make, bad):
        with pytest.raises(DomainError, match="non-finite"):
            make(bad)

    def test_toda_shape_mismatch(self):
        with pytest.raises(ConfigError, match="same shape"):
            TodaState((0.0, 0.1, 0.2), (0.0, 0.1))

    def test_cdw_branch(self):
        with pytest.raises(ConfigError):
            CdwState((0, 0, 0), 1.0, 1.0, 1.0, 0)

    def test_with_vector_keeps_constants(self):
        s = N3QState((0.1, 0.2, 0.3), (1, 2, 3), 0.4, 0.5, u0=0.7, alpha=0.2)
        t = s.with_vector(np.zeros(8))
        assert t.u0 == 0.7 and t.alpha == 0.2

    def test_value_of(self):
        s = N3State(0.3, -0.1, 0.2, 1.0, 0.7, 0.5)
        assert s.value_of("a2") == 0.7
        with pytest.raises(ConfigError):
            s.value_of("q1")


class TestTransforms:
    def test_flaschka_alpha_beta(self):
        f = flaschka_from_qp(TODA)
        q = np.asarray(TODA.q)
        np.testing.assert_allclose(f.first, np.exp(q[:-1] - q[1:]))
        np.testing.assert_allclose(f.second, TODA.p)

    def test_flaschka_a_b(self):
        f = flaschka_from_qp(TODA, "a_b")
        q = np.asarray(TODA.q)
        np.testing.assert_allclose(f.first, 0.5*np.exp(0.5*(q[:-1] - q[1:])))
        np.testing.assert_allclose(f.second, -0.5*np.asarray(TODA.p))

    @pytest.mark.parametrize("variant", ["alpha_beta", "a_b"])
    def test_flaschka_inverse(self, variant):
        back = toda_from_flaschka(flaschka_from_qp(TODA, variant), q0=TODA.q[0])
        np.testing.assert_allclose(back.q, TODA.q, atol=1e-14)
        np.testing.assert_allclose(back.p, TODA.p, atol=1e-14)

    def test_flaschka_unknown_variant(self):
        with pytest.raises(DomainError):
            flaschka_from_qp(TODA, "x_y")

    def test_flaschka_needs_positive_entries(self):
        with pytest.raises(DomainError):
            toda_from_flaschka(FlaschkaState("alpha_beta", (1.0, -1.0), (0.0, 0.0, 0.0)))

    def test_qn_from_tau(self):
        assert qn_from_tau(np.e, 1.0) == pytest.approx(1.0)
        with pytest.raises(DomainError):
            qn_from_tau(0.0, 1.0)

    def test_cdw_branch_and_inverse(self):
        s = N3State(0.3, -0.1, 0.2, 1.0, -0.7, 0.5)
        c = cdw_from_n3(s)
        assert c.branch == -1
        assert (c.d2, c.d3, c.w) == pytest.approx((1.0, 0.49, 0.25))
        back = n3_from_cdw(c)
        # a1, a2 come back non-negative, u carries the sign of u*a1*a2
        assert (back.a1, back.a2, back.u) == pytest.approx((1.0, 0.7, -0.5))
        assert back.u*back.a1*back.a2 == pytest.approx(s.u*s.a1*s.a2)

    def test_n3_from_cdw_domain(self):
        with pytest.raises(DomainError):
            n3_from_cdw(CdwState((0, 0, 0), -1.0, 1.0, 1.0))

    def test_gtl_embedding(self):
        g = gtl_from_n3(N3State(1, 2, 3, 0.4, 0.5, 0.6))
        assert g.N == 1 and g.a == g.b == (0.4, 0.5)
        assert g.u == g.v == 0.6

    def test_n3_from_n3q(self):
        s = N3QState((0.2, -0.1, 0.3), (0.4, -0.2, 0.1), 0.8, 0.6, u0=0.7)
        n = n3_from_n3q(s)
        assert n.a1 == pytest.approx(np.exp(0.3)*0.8)
        assert n.a2 == pytest.approx(np.exp(-0.4)*0.6)
        assert n.u == pytest.approx(0.7*np.exp(-0.1))
        assert n.p == s.p
