"""
Vector fields of every flow, the Lax-commutator oracle, and the time integrators.
"""
import csv
from dataclasses import dataclass, field
from enum import Enum
import json
import logging
import math
import numpy as np
from typing import Callable, Dict, List, Optional, Sequence
from .errors import ConfigError, DomainError, IntegrationError, KindMismatchError, LaxClosureError, PreconditionError
from .lax import LaxRep, build_lax, commutator, entry_map, spectrum
from .model import n3_from_cdw, n3_from_n3q
from .presets.integrators import INTEGRATOR_PRESETS
from .states import CdwState, FlaschkaState, GtlState, N3QState, N3State, TodaState
from .utils import fmt_float, to_jsonable

logger = logging.getLogger(__name__)


class FlowId(str, Enum):
    TL_QP = "tl_qp"
    TL_ALPHA_BETA = "tl_alpha_beta"
    TL_AB = "tl_ab"
    GTL = "gtl"
    N3 = "n3"
    N3_Q = "n3_q"
    CDW = "cdw"


FLOW_STATE_KIND = {
    FlowId.TL_QP: TodaState,
    FlowId.TL_ALPHA_BETA: FlaschkaState,
    FlowId.TL_AB: FlaschkaState,
    FlowId.GTL: GtlState,
    FlowId.N3: N3State,
    FlowId.N3_Q: N3QState,
    FlowId.CDW: CdwState,
}


def _flow(flow) -> FlowId:
    try:
        return FlowId(flow)
    except ValueError:
        raise ConfigError(f"Unknown flow '{flow}'. Choose from {[f.value for f in FlowId]}") from None


def _check_kind(state, flow: FlowId):
    expected = FLOW_STATE_KIND[flow]
    if not isinstance(state, expected):
        raise KindMismatchError(f"flow {flow.value} acts on a {expected.__name__}, got {type(state).__name__}")
    if flow == FlowId.TL_ALPHA_BETA and state.variant != "alpha_beta":
        raise KindMismatchError("flow tl_alpha_beta needs a Flaschka state of variant 'alpha_beta'")
    if flow == FlowId.TL_AB and state.variant != "a_b":
        raise KindMismatchError("flow tl_ab needs a Flaschka state of variant 'a_b'")


########################################################################################################
# vector fields
########################################################################################################
def _toda_qp(s: TodaState) -> np.ndarray:
    q = np.asarray(s.q); p = np.asarray(s.p)
    if s.boundary == "periodic":
        left = np.exp(np.roll(q, 1) - q)
        right = np.exp(q - np.roll(q, -1))
    else:
        left = np.concatenate(([0.0], np.exp(q[:-1] - q[1:])))
        right = np.concatenate((np.exp(q[:-1] - q[1:]), [0.0]))
    return np.concatenate((p, left - right))


def _toda_alpha_beta(s: FlaschkaState) -> np.ndarray:
    alpha = np.asarray(s.first); beta = np.asarray(s.second)
    alpha_pad = np.concatenate(([0.0], alpha, [0.0]))
    alpha_dot = alpha*(beta[:-1] - beta[1:])
    beta_dot = alpha_pad[:-1] - alpha_pad[1:]
    return np.concatenate((alpha_dot, beta_dot))


def _toda_ab(s: FlaschkaState) -> np.ndarray:
    a = np.asarray(s.first); b = np.asarray(s.second)
    a_pad = np.concatenate(([0.0], a, [0.0]))
    a_dot = a*(b[1:] - b[:-1])
    b_dot = 2.0*(a_pad[1:]**2 - a_pad[:-1]**2)
    return np.concatenate((a_dot, b_dot))


def n3_field(p1, p2, p3, a1, a2, u) -> tuple:
    """
    Right-hand side of the symmetric N=3 system. Only ring operations are used, so the arguments
    may be floats or truncated series.
    """
    return (-2.0*(a1*a1 + u*u),
            2.0*(a1*a1 - a2*a2),
            2.0*(a2*a2 + u*u),
            a1*(p1 - p2) - 2.0*u*a2,
            a2*(p2 - p3) + 2.0*u*a1,
            (p1 - p3)*u)


def _n3(s: N3State) -> np.ndarray:
    return np.array(n3_field(*s.to_vector()))


def _n3_q(s: N3QState) -> np.ndarray:
    q1, q2, q3 = s.q
    a1, a2, u = s.a1, s.a2, s.u
    return np.array([*s.p,
                     -2.0*(a1**2 + u**2),
                     -2.0*(a2**2 - a1**2),
                     2.0*(a2**2 + u**2),
                     -2.0*s.u0*np.exp(2.0*(q2 - q3))*s.q4,
                     2.0*s.u0*np.exp(2.0*(q1 - q2))*s.p4])


def _sqrt_term(value: float, term: str) -> float:
    if value < 0:
        raise DomainError(f"negative radicand {value:.6g} in the coupling term sqrt({term})")
    return math.sqrt(value)


def _cdw(s: CdwState, as_printed: bool) -> np.ndarray:
    c0, c1, c2 = s.c
    d2, d3, w = s.d2, s.d3, s.w
    if as_printed:
        down = _sqrt_term(w*d3, "w*d3"); up = _sqrt_term(w*d2, "w*d2")
    else:
        down = up = s.branch*_sqrt_term(w*d2*d3, "w*d2*d3")
    return np.array([-(d2 + w),
                     d2 - d3,
                     d3 + w,
                     (c0 - c1)*d2 - 2.0*down,
                     (c1 - c2)*d3 + 2.0*up,
                     (c0 - c2)*w])


def _gtl_printed(s: GtlState) -> np.ndarray:
    """
    The generalized system exactly as printed, including the u, v lines' (p_2 - p_4) factor read
    as site labels 2 and 4 (absent sites contribute 0).
    """
    N = s.N
    delta = lambda i, j: 1.0 if i == j else 0.0
    p_dot = [2.0*(s.a_at(k - 1)*s.b_at(k - 1) - s.a_at(k)*s.b_at(k)) +
             2.0*s.u*s.v*(delta(k, 1) - delta(k, -1)) for k in s.sites]
    a_dot = [(s.p_at(k) - s.p_at(k + 1))*s.a_at(k) +
             2.0*s.v*(s.b_at(k - 1)*delta(k, 0) - s.b_at(k + 1)*delta(k, -1)) for k in range(-N, N)]
    b_dot = [(s.p_at(k) - s.p_at(k + 1))*s.b_at(k) +
             2.0*s.u*(s.a_at(k - 1)*delta(k, 0) - s.a_at(k + 1)*delta(k, -1)) for k in range(-N, N)]
    rate = s.p_at(2) - s.p_at(4)
    return np.array(p_dot + a_dot + b_dot + [rate*s.u, rate*s.v])


def classic_ab_rhs(s: GtlState) -> np.ndarray:
    """
    The ordinary lattice in (p, a, b) form on the GTL container, u and v frozen at 0:
    p_k' = 2(a_{k-1}b_{k-1} - a_k b_k), a_k' = (p_k - p_{k+1})a_k, b_k' = (p_k - p_{k+1})b_k.
    """
    p = np.asarray(s.p); a = np.asarray(s.a); b = np.asarray(s.b)
    ab = np.concatenate(([0.0], a*b, [0.0]))
    p_dot = 2.0*(ab[:-1] - ab[1:])
    gap = p[:-1] - p[1:]
    return np.concatenate((p_dot, gap*a, gap*b, [0.0, 0.0]))


def rhs(state, flow, as_printed: bool = False) -> np.ndarray:
    """
    Time derivative of every coordinate of the state, in state.coordinates() order.

    Parameters:
    -----------
      - state: a state whose kind matches the flow
      - flow: FlowId or its string value
      - as_printed: GTL and CDW only. GTL: use the printed generalized system instead of the Lax
        projection. CDW: use the printed sqrt(w*d3), sqrt(w*d2) couplings instead of
        branch*sqrt(w*d2*d3).
    """
    flow = _flow(flow)
    _check_kind(state, flow)

    match flow:
        case FlowId.TL_QP:
            return _toda_qp(state)
        case FlowId.TL_ALPHA_BETA:
            return _toda_alpha_beta(state)
        case FlowId.TL_AB:
            return _toda_ab(state)
        case FlowId.GTL:
            return _gtl_printed(state) if as_printed else rhs_from_lax(state, LaxRep.GTL_BANDED)
        case FlowId.N3:
            return _n3(state)
        case FlowId.N3_Q:
            return _n3_q(state)
        case FlowId.CDW:
            return _cdw(state, as_printed)


########################################################################################################
# the Lax oracle
########################################################################################################
def _project(state, rep: LaxRep, order: str = "LM") -> np.ndarray:
    pair = build_lax(state, rep)
    C = commutator(pair.L, pair.M) if order == "LM" else commutator(pair.M, pair.L)
    entries = entry_map(state, rep)

    tol = 1e-12*max(1.0, float(np.max(np.abs(C))))
    for (i, j), value in np.ndenumerate(C):
        if (i, j) not in entries and abs(value) > tol:
            raise LaxClosureError(i, j, float(value), rep.value, order)

    index = state.coordinate_index()
    total = np.zeros(len(index)); count = np.zeros(len(index))
    for (i, j), name in entries.items():
        total[index[name]] += C[i, j]; count[index[name]] += 1
    return total/np.maximum(count, 1)


def rhs_from_lax(state, rep) -> np.ndarray:
    """
    The oracle right-hand side: [L, M] projected back onto the coordinate slots (diagonal to the
    momenta, off-diagonal to the couplings, symmetric duplicates averaged).

    CDW projects the printed 3x3 pair under [L, M] first and [M, L] second and returns the first
    order that closes. Neither closes away from c0 = c1 = c2, so a generic c/d/w state raises the
    LaxClosureError of the [L, M] attempt; cdw_rhs_via_n3 is the working c/d/w oracle.
    """
    rep = LaxRep(rep)
    match rep:
        case LaxRep.N3_SYM | LaxRep.GTL_BANDED:
            return _project(state, rep)
        case LaxRep.CDW:
            if not isinstance(state, CdwState):
                raise KindMismatchError(f"CDW oracle needs a CdwState, got {type(state).__name__}")
            failures = []
            for order in ("LM", "ML"):
                try:
                    return _project(state, rep, order)
                except LaxClosureError as err:
                    failures.append(err)
            logger.debug(f"printed c/d/w pair closes under neither order: {failures}")
            raise failures[0]
        case _:
            raise KindMismatchError(f"{rep.value} has no entry-to-coordinate projection")


def cdw_rhs_via_n3(state: CdwState) -> np.ndarray:
    """
    The symmetric N=3 commutator pushed through c = p, d2 = a1^2, d3 = a2^2, w = u^2 at half time.
    """
    if not isinstance(state, CdwState):
        raise KindMismatchError(f"cdw_rhs_via_n3 needs a CdwState, got {type(state).__name__}")
    s = n3_from_cdw(state)
    p_dot = _project(s, LaxRep.N3_SYM)
    return np.array([0.5*p_dot[0], 0.5*p_dot[1], 0.5*p_dot[2],
                     s.a1*p_dot[3], s.a2*p_dot[4], s.u*p_dot[5]])


def reduction_check(state: GtlState) -> float:
    """
    max |rhs(state, GTL) - classic lattice rhs| on a state with u = v = 0.
    """
    if not state.is_classic:
        raise PreconditionError(f"reduction_check needs u = v = 0, got u={state.u}, v={state.v}")
    return float(np.max(np.abs(rhs(state, FlowId.GTL) - classic_ab_rhs(state))))


def printed_vs_oracle(state: GtlState) -> List[dict]:
    """
    Per-coordinate comparison of the printed generalized system with the Lax oracle.
    """
    printed = rhs(state, FlowId.GTL, as_printed=True)
    oracle = rhs(state, FlowId.GTL)
    return [{"coordinate": name, "printed": float(x), "oracle": float(y), "difference": float(x - y)}
            for name, x, y in zip(state.coordinates(), printed, oracle)]


########################################################################################################
# monitors
########################################################################################################
Monitor = Callable[[object], Dict[str, float]]

# C2 = a1 a2/u - p2 is reported as absent once |u| drops to this value
C2_U_FLOOR = 1e-3


def _n3_monitor(s) -> Dict[str, float]:
    from .poisson import invariants
    inv = invariants(s, kmax=3, u_floor=C2_U_FLOOR)
    row = {k: (float("nan") if v is None else float(v)) for k, v in inv.as_row().items()}
    lams = spectrum(build_lax(s if isinstance(s, N3State) else n3_from_n3q(s), LaxRep.N3_SYM).L).real
    row.update({f"lam{i + 1}": float(v) for i, v in enumerate(lams)})
    return row


def _cdw_monitor(s: CdwState) -> Dict[str, float]:
    return _n3_monitor(n3_from_cdw(s))


def _gtl_monitor(s: GtlState) -> Dict[str, float]:
    from .poisson import invariants
    inv = invariants(s, kmax=3)
    return {k: (float("nan") if v is None else float(v)) for k, v in inv.as_row().items()}


def _toda_energy(s: TodaState) -> Dict[str, float]:
    q = np.asarray(s.q); p = np.asarray(s.p)
    H = 0.5*np.sum(p**2) + np.sum(np.exp(q[:-1] - q[1:]))
    if s.boundary == "periodic":
        H += np.exp(q[-1] - q[0])
    return {"H": float(H)}


def default_monitors(flow) -> List[Monitor]:
    match _flow(flow):
        case FlowId.N3 | FlowId.N3_Q:
            return [_n3_monitor]
        case FlowId.CDW:
            return [_cdw_monitor]
        case FlowId.GTL:
            return [_gtl_monitor]
        case FlowId.TL_QP:
            return [_toda_energy]
        case _:
            return []


########################################################################################################
# integrators
########################################################################################################
@dataclass(frozen=True)
class IntegratorConfig:
    """
    Parameters:
    -----------
      - method: "rk4_fixed" or "rk45_adaptive"
      - dt: step of rk4_fixed, initial step guess of rk45_adaptive
      - atol, rtol: local error tolerances of rk45_adaptive, each in [1e-14, 1e-2]
      - t_end: final time (> 0)
      - max_steps: hard cap on attempted steps
    """
    method: str = "rk45_adaptive"
    dt: float = 1e-2
    atol: float = 1e-10
    rtol: float = 1e-10
    t_end: float = 10.0
    max_steps: int = 200_000

    def __post_init__(self):
        if self.method not in ("rk4_fixed", "rk45_adaptive"):
            raise ConfigError(f"Unknown integrator '{self.method}'. Choose 'rk4_fixed' or 'rk45_adaptive'.")
        if self.dt <= 0 or self.t_end <= 0 or self.max_steps <= 0:
            raise ConfigError(f"dt, t_end and max_steps must be positive, got dt={self.dt}, "
                              f"t_end={self.t_end}, max_steps={self.max_steps}")
        for name in ("atol", "rtol"):
            value = getattr(self, name)
            if not 1e-14 <= value <= 1e-2:
                raise ConfigError(f"{name} must lie in [1e-14, 1e-2], got {value}")

    @classmethod
    def from_preset(cls, preset: "str | dict" = "default", **overrides) -> "IntegratorConfig":
        """
        Build from a preset name in INTEGRATOR_PRESETS or a dict, then apply keyword overrides.
        """
        if isinstance(preset, str):
            if preset not in INTEGRATOR_PRESETS:
                logger.warning(f"{preset} is not an integrator preset, using 'default'. Presets: "
                               f"{list(INTEGRATOR_PRESETS)}")
            settings = dict(INTEGRATOR_PRESETS.get(preset, INTEGRATOR_PRESETS["default"]))
        else:
            settings = dict(preset)
        settings.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**settings)


@dataclass
class Trajectory:
    times: List[float]
    states: List[object]
    series: Dict[str, List[float]] = field(default_factory=dict)
    stats: Dict[str, int] = field(default_factory=dict)
    flow: str = ""

    @property
    def final(self):
        return self.states[-1]

    def drifts(self) -> Dict[str, float]:
        from .utils import drift
        return {name: drift(values) for name, values in self.series.items()}


# Dormand-Prince 5(4) tableau
DP_C = np.array([0.0, 1/5, 3/10, 4/5, 8/9, 1.0, 1.0])
DP_A = [
    [],
    [1/5],
    [3/40, 9/40],
    [44/45, -56/15, 32/9],
    [19372/6561, -25360/2187, 64448/6561, -212/729],
    [9017/3168, -355/33, 46732/5247, 49/176, -5103/18656],
    [35/384, 0.0, 500/1113, 125/192, -2187/6784, 11/84],
]
DP_B = np.array([35/384, 0.0, 500/1113, 125/192, -2187/6784, 11/84, 0.0])
DP_E = DP_B - np.array([5179/57600, 0.0, 7571/16695, 393/640, -92097/339200, 187/2100, 1/40])


def _record(traj: Trajectory, t: float, state, monitors: Sequence[Monitor]):
    traj.times.append(float(t)); traj.states.append(state)
    for monitor in monitors:
        for name, value in monitor(state).items():
            traj.series.setdefault(name, []).append(float(value))


def integrate(state0, flow, cfg: IntegratorConfig = IntegratorConfig(),
              monitors: Optional[Sequence[Monitor]] = None, as_printed: bool = False) -> Trajectory:
    """
    Integrate a flow from state0 to cfg.t_end, sampling at every accepted step.

    Parameters:
    -----------
      - state0: initial state, kind matching the flow
      - flow: FlowId or its string value
      - cfg: IntegratorConfig
      - monitors: callables state -> {name: value}, evaluated per sample. None uses
        default_monitors(flow); pass [] for none.
      - as_printed: forwarded to rhs
    """
    flow = _flow(flow)
    _check_kind(state0, flow)
    monitors = default_monitors(flow) if monitors is None else list(monitors)

    evals = 0

    def f(y):
        nonlocal evals
        evals += 1
        return rhs(state0.with_vector(y), flow, as_printed)

    traj = Trajectory([], [], flow=flow.value)
    y = state0.to_vector(); t = 0.0
    _record(traj, t, state0, monitors)
    accepted = 0; rejected = 0

    if cfg.method == "rk4_fixed":
        n_steps = int(math.ceil(cfg.t_end/cfg.dt - 1e-12))
        if n_steps > cfg.max_steps:
            raise IntegrationError(f"rk4_fixed needs {n_steps} steps, above max_steps={cfg.max_steps}", t)
        for n in range(n_steps):
            h = min(cfg.dt, cfg.t_end - t)
            k1 = f(y); k2 = f(y + 0.5*h*k1); k3 = f(y + 0.5*h*k2); k4 = f(y + h*k3)
            y_new = y + h*(k1 + 2*k2 + 2*k3 + k4)/6.0
            if not np.all(np.isfinite(y_new)):
                raise IntegrationError("state became non-finite", t)
            y = y_new
            t = cfg.t_end if n == n_steps - 1 else t + h
            accepted += 1
            _record(traj, t, state0.with_vector(y), monitors)

    else:
        h = min(cfg.dt, cfg.t_end)
        attempts = 0
        while t < cfg.t_end:
            attempts += 1
            if attempts > cfg.max_steps:
                raise IntegrationError(f"max_steps={cfg.max_steps} exceeded", t)
            h = min(h, cfg.t_end - t)

            k = [f(y)]
            for i in range(1, 7):
                k.append(f(y + h*sum(a*kj for a, kj in zip(DP_A[i], k))))
            K = np.array(k)
            y_new = y + h*(DP_B @ K)
            err_vec = h*(DP_E @ K)

            if not np.all(np.isfinite(y_new)):
                rejected += 1; h *= 0.2
                if h < 1e-14*max(1.0, t):
                    raise IntegrationError("state became non-finite", t)
                continue

            scale = cfg.atol + cfg.rtol*np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.sqrt(np.mean((err_vec/scale)**2)))

            if err <= 1.0:
                t = cfg.t_end if cfg.t_end - (t + h) < 1e-14*max(1.0, cfg.t_end) else t + h
                y = y_new
                accepted += 1
                _record(traj, t, state0.with_vector(y), monitors)
            else:
                rejected += 1

            factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9*err**(-0.2)))
            h *= factor

    traj.stats = {"steps": accepted, "rejections": rejected, "rhs_evaluations": evals}
    logger.debug(f"{flow.value}: {accepted} steps, {rejected} rejections, {evals} rhs evaluations")
    return traj


########################################################################################################
# export
########################################################################################################
def write_csv(traj: Trajectory, path) -> None:
    """
    Header t,<coordinates>,<monitor series>; one row per accepted step, 17 significant digits.
    Absent values (NaN) are written as empty cells.
    """
    names = traj.states[0].coordinates()
    series_names = list(traj.series)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", *names, *series_names])
        for i, (t, s) in enumerate(zip(traj.times, traj.states)):
            values = [fmt_float(x) for x in s.to_vector()]
            extra = ["" if not np.isfinite(traj.series[n][i]) else fmt_float(traj.series[n][i])
                     for n in series_names]
            writer.writerow([fmt_float(t), *values, *extra])


def write_stats(traj: Trajectory, path) -> None:
    doc = {"flow": traj.flow, "integrator_stats": traj.stats, "t_end": traj.times[-1],
           "samples": len(traj.times), "max_drift": traj.drifts()}
    with open(path, "w") as fh:
        json.dump(to_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")
