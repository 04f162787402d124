"""
Tau-function form of the three-site c/d/w system and its epsilon-expansion solver.

Substitution:
  d_k = 1 + (ln tau_k)'',  w = -1 - (ln f)''
  c1 = I1 - (ln tau2/f)',  c2 = I2 + (ln tau2/tau3)',  c3 = I3 + (ln tau3/f)'

Residual lines (c_ij = c_i - c_j, sigma-free squared coupling):
  r1 = (d2 + d3)' - c12 d2 - c23 d3
  r2 = (d3' - c23 d3)^2 - 4 w d2 d3         coupling="corrected"
     = (d3' - c23 d3)^2 - 4 w d2            coupling="printed"
  r3 = w' - c13 w                           level="cdw"
     = f''f - f'^2 + f^2 + f^4/(tau2 tau3) exp(I130 + I13 t)   level="tau" (integrated form)

Every helper below only uses ring operations, log, dt and reciprocal, so the same code evaluates
on SeriesFn (numeric epsilon) and on EpsilonSeries (formal epsilon).
"""
from dataclasses import dataclass
import logging
import math
import numpy as np
from scipy import linalg
from typing import Dict, Literal, Optional, Sequence, Tuple
from ..dynamics import n3_field
from ..errors import DomainError, GtlLabError, PreconditionError, RankDeficiencyError
from ..states import N3State
from .series import EpsilonSeries, SeriesFn, stack_coeffs

logger = logging.getLogger(__name__)

Coupling = Literal["corrected", "printed"]
Level = Literal["tau", "cdw"]


@dataclass(frozen=True, eq=False)
class TauTriple:
    """
    Parameters:
    -----------
      - tau2, tau3, f: positive-at-t0 SeriesFn about a common base point
      - I1, I2, I3: integration constants of the c substitution
      - I130: constant in the exponent of the integrated w line
    """
    tau2: SeriesFn
    tau3: SeriesFn
    f: SeriesFn
    I1: float = 0.0
    I2: float = 0.0
    I3: float = 0.0
    I130: float = 0.0

    def __post_init__(self):
        for name in ("tau2", "tau3", "f"):
            s = getattr(self, name)
            if not isinstance(s, SeriesFn):
                raise GtlLabError(f"{name} must be a SeriesFn, got {type(s).__name__}")
            if s.coeffs[0] <= 0:
                raise DomainError(f"{name}(t0) must be positive, got {s.coeffs[0]}")
        if not self.tau2.t0 == self.tau3.t0 == self.f.t0:
            raise GtlLabError("tau2, tau3 and f must share a base point")

    @property
    def I12(self) -> float:
        return self.I1 - self.I2

    @property
    def I23(self) -> float:
        return self.I2 - self.I3

    @property
    def I13(self) -> float:
        return self.I1 - self.I3

    @property
    def t0(self) -> float:
        return self.tau2.t0

    @property
    def K(self) -> int:
        return min(self.tau2.K, self.tau3.K, self.f.K)

    def constants(self) -> Dict[str, float]:
        return {"I1": self.I1, "I2": self.I2, "I3": self.I3, "I130": self.I130}

    def to_dict(self) -> dict:
        return {"t0": self.t0, "tau2": self.tau2.coeffs.tolist(), "tau3": self.tau3.coeffs.tolist(),
                "f": self.f.coeffs.tolist(), **self.constants()}

    @classmethod
    def from_dict(cls, doc: dict) -> "TauTriple":
        t0 = float(doc.get("t0", 0.0))
        return cls(SeriesFn(doc["tau2"], t0), SeriesFn(doc["tau3"], t0), SeriesFn(doc["f"], t0),
                   float(doc.get("I1", 0.0)), float(doc.get("I2", 0.0)), float(doc.get("I3", 0.0)),
                   float(doc.get("I130", 0.0)))


########################################################################################################
# generic building blocks
########################################################################################################
def _dw(l2, l3, lf):
    return l2.dt(2) + 1.0, l3.dt(2) + 1.0, -(lf.dt(2) + 1.0)


def _c(l2, l3, lf, I1, I2, I3):
    return I1 - (l2 - lf).dt(), I2 + (l2 - l3).dt(), I3 + (l3 - lf).dt()


def cdw_system_residual(c: Sequence, d2, d3, w, coupling: Coupling = "corrected") -> tuple:
    """
    The three lines of the reduced c/d/w system. c = (c1, c2, c3).
    """
    c1, c2, c3 = c
    c12 = c1 - c2; c23 = c2 - c3; c13 = c1 - c3
    r1 = (d2 + d3).dt() - c12*d2 - c23*d3
    core = d3.dt() - c23*d3
    match coupling:
        case "corrected":
            r2 = core*core - w*d2*d3*4.0
        case "printed":
            r2 = core*core - w*d2*4.0
        case _:
            raise GtlLabError(f"Unknown coupling '{coupling}'. Choose 'corrected' or 'printed'.")
    r3 = w.dt() - c13*w
    return r1, r2, r3


def _integrated_w_line(tau2, tau3, f, I130: float, I13: float, tvar: SeriesFn):
    return f.dt(2)*f - f.dt()*f.dt() + f*f + (f**4)*(tau2*tau3).reciprocal()*(tvar*I13 + I130).exp()


def _residuals(tau2, tau3, f, consts: Dict[str, float], coupling: Coupling, level: Level,
               tvar: SeriesFn) -> tuple:
    l2, l3, lf = tau2.log(), tau3.log(), f.log()
    d2, d3, w = _dw(l2, l3, lf)
    c = _c(l2, l3, lf, consts["I1"], consts["I2"], consts["I3"])
    r1, r2, r3 = cdw_system_residual(c, d2, d3, w, coupling)
    match level:
        case "cdw":
            return r1, r2, r3
        case "tau":
            I13 = consts["I1"] - consts["I3"]
            return r1, r2, _integrated_w_line(tau2, tau3, f, consts["I130"], I13, tvar)
        case _:
            raise GtlLabError(f"Unknown residual level '{level}'. Choose 'tau' or 'cdw'.")


########################################################################################################
# public evaluators
########################################################################################################
def dw_from_tau(tt: TauTriple) -> Tuple[SeriesFn, SeriesFn, SeriesFn]:
    """
    (d2, d3, w) = (1 + (ln tau2)'', 1 + (ln tau3)'', -1 - (ln f)'').
    """
    d2, d3, w = _dw(tt.tau2.log(), tt.tau3.log(), tt.f.log())
    if w.coeffs[0] < 0:
        logger.info(f"w(t0) = {w.coeffs[0]:.6g} < 0: the tau substitution gives w <= 0 here, while "
                    f"w = u^2 needs w >= 0")
    return d2, d3, w


def c_from_tau(tt: TauTriple) -> Tuple[SeriesFn, SeriesFn, SeriesFn]:
    return _c(tt.tau2.log(), tt.tau3.log(), tt.f.log(), tt.I1, tt.I2, tt.I3)


def c_differences(tt: TauTriple) -> Tuple[SeriesFn, SeriesFn, SeriesFn]:
    """
    (c12, c23, c13) from their own closed forms:
      c12 = I12 - (ln tau2^2/(tau3 f))',  c23 = I23 + (ln tau2 f/tau3^2)',  c13 = I13 - (ln tau2 tau3/f^2)'
    """
    l2, l3, lf = tt.tau2.log(), tt.tau3.log(), tt.f.log()
    return (tt.I12 - (l2*2.0 - l3 - lf).dt(),
            tt.I23 + (l2 + lf - l3*2.0).dt(),
            tt.I13 - (l2 + l3 - lf*2.0).dt())


def gtl_tau_residual(tt: TauTriple, coupling: Coupling = "corrected", level: Level = "tau"
                     ) -> Tuple[SeriesFn, SeriesFn, SeriesFn]:
    """
    Residuals of the tau form of the reduced system.

    Parameters:
    -----------
      - tt: TauTriple
      - coupling: "corrected" uses 4 w d2 d3 in the second line, "printed" uses 4 w d2
      - level: "tau" gives the third line in its integrated form (the f'' f - f'^2 ... line),
        "cdw" gives w' - c13 w
    """
    tvar = SeriesFn.variable(tt.K, tt.t0)
    return _residuals(tt.tau2, tt.tau3, tt.f, tt.constants(), coupling, level, tvar)


def residual_norm(residuals: Sequence[SeriesFn]) -> float:
    return max(r.max_abs() for r in residuals)


########################################################################################################
# seeds from the three-site flow
########################################################################################################
def n3_taylor(state: N3State, order: int) -> Tuple[SeriesFn, ...]:
    """
    Taylor coefficients at the state of the N=3 solution through it, by Picard iteration on
    truncated series (each sweep fixes one more coefficient).
    """
    y0 = state.to_vector()
    y = [SeriesFn.constant(v, order) for v in y0]
    for _ in range(order + 1):
        F = n3_field(*y)
        y = [F_i.integrate(v).truncate(order) for F_i, v in zip(F, y0)]
    return tuple(y)


def tau_seed_from_n3(state: N3State, order: int = 12, t0: float = 0.0) -> TauTriple:
    """
    A TauTriple that solves the tau system exactly up to truncation, built from the N=3 solution
    through state (placed at c/d/w time t0).

    c_k(t) = p_k((t - t0)/2), d2 = a1^2, d3 = a2^2, w = u^2; then ln tau_k = double integral of
    (d_k - 1) plus a linear term and ln f = double integral of (-1 - w), with all three equal to 1
    at t0. I1 = I2 = I3 = (p1 + p2 + p3)/3 (so I12 = I23 = I13 = 0) and I130 = ln w(t0).
    """
    if state.u*state.a1*state.a2 == 0:
        raise DomainError("tau seeds need u*a1*a2 != 0 (w > 0 and a nondegenerate coupling)")
    if order < 4:
        raise GtlLabError(f"tau seeds need order >= 4 to leave any residual coefficients, got {order}")

    p1, p2, p3, a1, a2, u = (SeriesFn(s.rescale(0.5).coeffs, t0) for s in n3_taylor(state, order))
    d2, d3, w = a1*a1, a2*a2, u*u

    I = (p1.coeffs[0] + p2.coeffs[0] + p3.coeffs[0])/3.0
    alpha2 = I - p1.coeffs[0]
    alpha3 = alpha2 - p2.coeffs[0] + I
    s = SeriesFn.variable(order, t0) - t0

    ln_tau2 = (d2 - 1.0).integrate().integrate().truncate(order) + s*alpha2
    ln_tau3 = (d3 - 1.0).integrate().integrate().truncate(order) + s*alpha3
    ln_f = (-1.0 - w).integrate().integrate().truncate(order)
    logger.debug(f"tau seed at order {order}: I = {I:.6g}, alpha2 = {alpha2:.6g}, alpha3 = {alpha3:.6g}")
    return TauTriple(ln_tau2.exp(), ln_tau3.exp(), ln_f.exp(), I, I, I, math.log(w.coeffs[0]))


########################################################################################################
# epsilon expansion
########################################################################################################
@dataclass(frozen=True, eq=False)
class EpsilonFamily:
    """
    tau2 = sum_k eps^k terms[k][0], tau3 = sum_k eps^k terms[k][1], f = sum_k eps^k terms[k][2],
    sharing the constants of the seed.
    """
    terms: tuple
    I1: float = 0.0
    I2: float = 0.0
    I3: float = 0.0
    I130: float = 0.0

    def __post_init__(self):
        terms = tuple(tuple(t) for t in self.terms)
        if not terms or any(len(t) != 3 for t in terms):
            raise GtlLabError("EpsilonFamily terms must be (tau2, tau3, f) triples")
        if any(s.coeffs[0] <= 0 for s in terms[0]):
            raise DomainError("order-0 terms of an EpsilonFamily must be positive at t0")
        object.__setattr__(self, "terms", terms)

    @property
    def K_eps(self) -> int:
        return len(self.terms) - 1

    @property
    def seed(self) -> TauTriple:
        return TauTriple(*self.terms[0], **self.constants())

    def constants(self) -> Dict[str, float]:
        return {"I1": self.I1, "I2": self.I2, "I3": self.I3, "I130": self.I130}

    def component(self, i: int) -> EpsilonSeries:
        return EpsilonSeries(tuple(t[i] for t in self.terms))

    def at(self, eps: float) -> TauTriple:
        return TauTriple(*(self.component(i).at(eps) for i in range(3)), **self.constants())

    def residual_norm(self, eps: float, coupling: Coupling = "corrected") -> float:
        return residual_norm(gtl_tau_residual(self.at(eps), coupling, "tau"))


def _split(x: np.ndarray, K: int, t0: float) -> Tuple[SeriesFn, SeriesFn, SeriesFn]:
    n = K + 1
    return tuple(SeriesFn(x[i*n:(i + 1)*n], t0) for i in range(3))


def series_solve(seed: TauTriple, K_eps: int, prescribed: Optional[Dict[int, Sequence[SeriesFn]]] = None,
                 coupling: Coupling = "corrected", tol: float = 1e-10) -> EpsilonFamily:
    """
    Solve for the epsilon corrections of a tau family order by order.

    At order k the eps^k coefficient of every residual is affine in the order-k unknowns (the
    t-coefficients of tau2^(k), tau3^(k), f^(k)). Its matrix is read off column by column, and
    the correction is the minimum-norm least-squares solution measured from the prescribed term
    (zero when none is given). A free direction is not an error; an order whose system cannot be
    satisfied raises RankDeficiencyError.

    Parameters:
    -----------
      - seed: order-0 TauTriple; must solve the system to tol per coefficient
      - K_eps: highest epsilon order
      - prescribed: {k: (tau2_k, tau3_k, f_k)} starting values for chosen orders; the solver adds
        the smallest correction that makes them consistent
      - coupling: second-line form, see gtl_tau_residual
      - tol: precondition and consistency tolerance
    """
    if K_eps < 0:
        raise GtlLabError(f"K_eps must be >= 0, got {K_eps}")
    prescribed = prescribed or {}
    consts = seed.constants()
    K = seed.K; t0 = seed.t0
    base = (seed.tau2.truncate(K), seed.tau3.truncate(K), seed.f.truncate(K))
    tvar = SeriesFn.variable(K, t0)

    worst = residual_norm(_residuals(*base, consts, coupling, "tau", tvar))
    if worst > tol:
        raise PreconditionError(f"seed does not solve the tau system at order 0: residual {worst:.3e} > {tol:.1e}")

    terms = [base]
    for k in range(1, K_eps + 1):
        guess = prescribed.get(k)
        x_p = (stack_coeffs([s.truncate(K) for s in guess]) if guess is not None
               else np.zeros(3*(K + 1)))

        def order_k(x: np.ndarray) -> np.ndarray:
            family = terms + [_split(x, K, t0)]
            comps = [EpsilonSeries(tuple(t[i] for t in family)) for i in range(3)]
            return stack_coeffs([r.terms[k] for r in _residuals(*comps, consts, coupling, "tau", tvar)])

        r0 = order_k(x_p)
        J = np.column_stack([order_k(x_p + e) - r0 for e in np.eye(x_p.size)])
        delta, _, rank, _ = linalg.lstsq(J, -r0)
        nullity = J.shape[1] - rank

        left = float(np.max(np.abs(r0 + J @ delta))) if r0.size else 0.0
        if left > tol*max(1.0, float(np.max(np.abs(r0)))):
            raise RankDeficiencyError(k, nullity, left)
        logger.info(f"epsilon order {k}: {J.shape[0]} equations, {J.shape[1]} unknowns, nullity {nullity}, "
                    f"correction norm {np.linalg.norm(delta):.3e}")
        terms.append(_split(x_p + delta, K, t0))

    return EpsilonFamily(tuple(terms), **consts)


def epsilon_slope(family: EpsilonFamily, epsilons: Sequence[float] = (1e-1, 1e-2, 1e-3),
                  coupling: Coupling = "corrected") -> float:
    """
    Least-squares slope of log10(residual) against log10(eps). A family correct through order K
    has slope close to K + 1.
    """
    eps = np.asarray(epsilons, dtype=float)
    if eps.size < 2 or np.any(eps <= 0):
        raise GtlLabError("epsilon_slope needs at least two positive epsilons")
    res = np.array([family.residual_norm(e, coupling) for e in eps])
    if np.all(res == 0):
        return math.inf
    res = np.maximum(res, np.finfo(float).tiny)
    return float(np.polyfit(np.log10(eps), np.log10(res), 1)[0])
