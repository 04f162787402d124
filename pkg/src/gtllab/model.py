"""
Exact coordinate transforms between the state representations.
"""
import logging
import numpy as np
from typing import Literal
from .core import state_from_dict, state_to_dict
from .errors import DomainError
from .states import TodaState, FlaschkaState, GtlState, N3State, N3QState, CdwState

logger = logging.getLogger(__name__)

__all__ = ["flaschka_from_qp", "toda_from_flaschka", "qn_from_tau", "cdw_from_n3", "n3_from_cdw",
           "gtl_from_n3", "n3_from_n3q", "state_from_dict", "state_to_dict"]


def flaschka_from_qp(s: TodaState, variant: Literal["alpha_beta", "a_b"] = "alpha_beta") -> FlaschkaState:
    """
    Flaschka variables of an open chain:
      alpha_n = exp(q_n - q_{n+1}), beta_n = p_n
      a_n = exp((q_n - q_{n+1})/2)/2, b_n = -p_n/2
    """
    q = np.asarray(s.q); p = np.asarray(s.p)
    dq = q[:-1] - q[1:]

    match variant:
        case "alpha_beta":
            return FlaschkaState("alpha_beta", tuple(np.exp(dq)), tuple(p))
        case "a_b":
            return FlaschkaState("a_b", tuple(0.5*np.exp(0.5*dq)), tuple(-0.5*p))
        case _:
            raise DomainError(f"Unknown Flaschka variant '{variant}'. Choose 'alpha_beta' or 'a_b'.")


def toda_from_flaschka(f: FlaschkaState, q0: float = 0.0) -> TodaState:
    """
    Rebuild (q, p) from Flaschka variables, pinning the free translation with q_1 = q0.
    """
    first = np.asarray(f.first); second = np.asarray(f.second)
    if np.any(first <= 0):
        raise DomainError("Flaschka off-diagonal entries must be positive to recover positions")

    if f.variant == "alpha_beta":
        dq = np.log(first); p = second
    else:
        dq = 2.0*np.log(2.0*first); p = -2.0*second

    q = q0 - np.concatenate(([0.0], np.cumsum(dq)))
    return TodaState(tuple(q), tuple(p), "open")


def qn_from_tau(tau_prev: float, tau_n: float) -> float:
    """
    q_n = ln(tau_{n-1}/tau_n)
    """
    if tau_prev <= 0 or tau_n <= 0:
        raise DomainError(f"tau values must be positive, got tau_prev={tau_prev}, tau_n={tau_n}")
    return float(np.log(tau_prev/tau_n))


def cdw_from_n3(s: N3State) -> CdwState:
    """
    Pointwise map c_k = p_k, d_{k+1} = a_k^2, w = u^2. The t -> t/2 rescaling is the caller's
    business: feed it the N=3 state at time t/2 to get the c/d/w state at time t.
    """
    sign = np.sign(s.u*s.a1*s.a2)
    return CdwState(s.p, s.a1**2, s.a2**2, s.u**2, -1 if sign < 0 else 1)


def n3_from_cdw(s: CdwState) -> N3State:
    """
    Inverse of cdw_from_n3 on the branch a1, a2 >= 0, u carrying the branch sign.
    """
    if min(s.d2, s.d3, s.w) < 0:
        raise DomainError(f"cannot take square roots of d2={s.d2}, d3={s.d3}, w={s.w}")
    return N3State(*s.c, np.sqrt(s.d2), np.sqrt(s.d3), s.branch*np.sqrt(s.w))


def gtl_from_n3(s: N3State) -> GtlState:
    """
    Embed the symmetric three-site system into the general container: sites -1, 0, 1 carry
    (p1, p2, p3), b = a and v = u.
    """
    return GtlState(1, s.p, s.a, s.a, s.u, s.u)


def n3_from_n3q(s: N3QState) -> N3State:
    return N3State(*s.p, s.a1, s.a2, s.u)
