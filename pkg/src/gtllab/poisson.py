"""
Lie-Poisson bracket engine for the generalized lattice.

The bracket is stored as linear structure constants {x_i, x_j} = sum_k c_ij^k x_k. Hamilton's
equations are read as dx/dt = sigma * {H, x}; sigma = +1 is what reproduces the flow (see
resolve_sign), and it is the value used everywhere below.
"""
from dataclasses import dataclass, field
import logging
import numpy as np
import numpy.typing as npt
from typing import Callable, Dict, List, Optional, Sequence, Tuple
from .errors import ConfigError, GtlLabError, KindMismatchError
from .lax import LaxRep, build_lax, entry_map
from .states import GtlState, N3QState, N3State, RepParams

logger = logging.getLogger(__name__)

SIGMA = 1
FD_STEP = 1e-6


########################################################################################################
# bracket tables
########################################################################################################
@dataclass(frozen=True)
class BracketTable:
    """
    Sparse table (x_i, x_j) -> {x_k: coefficient}. Antisymmetric partners are filled in on
    construction; every pair not present brackets to zero.

    Parameters:
    -----------
      - entries: the upper half of the table as given, e.g. {("p1", "a1"): {"a1": 1.0}}
      - coordinates: the coordinate names the table is defined on
      - kappa: the coefficient of the a-a (and b-b) couplings, kept for reporting
    """
    entries: Dict[Tuple[str, str], Dict[str, float]]
    coordinates: Tuple[str, ...]
    kappa: float = 1.0
    _full: Dict[Tuple[str, str], Dict[str, float]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        full = {}
        for (xi, xj), expr in self.entries.items():
            for name in (xi, xj, *expr):
                if name not in self.coordinates:
                    raise ConfigError(f"bracket table refers to unknown coordinate '{name}'")
            full[(xi, xj)] = dict(expr)
            full[(xj, xi)] = {k: -c for k, c in expr.items()}
        object.__setattr__(self, "_full", full)

    def evaluate(self, xi: str, xj: str, state) -> float:
        for name in (xi, xj):
            if name not in self.coordinates:
                raise ConfigError(f"Unknown coordinate '{name}'. Known coordinates: "
                                  f"{list(self.coordinates)}")
        expr = self._full.get((xi, xj))
        if not expr:
            return 0.0
        return float(sum(c*state.value_of(k) for k, c in expr.items()))

    def matrix(self, state) -> np.ndarray:
        """
        The Poisson tensor P_ij = {x_i, x_j} evaluated at the state, in coordinate order.
        """
        names = state.coordinates()
        x = state.to_vector()
        index = {n: i for i, n in enumerate(names)}
        P = np.zeros((len(names), len(names)))
        for (xi, xj), expr in self._full.items():
            P[index[xi], index[xj]] = sum(c*x[index[k]] for k, c in expr.items())
        return P


def n3_table(kappa: float = 1.0) -> BracketTable:
    """
    {p_i, a_i} = a_i, {p_{i+1}, a_i} = -a_i, {p_1, u} = u, {p_3, u} = -u, {a_1, a_2} = kappa*u.
    """
    entries = {("p1", "a1"): {"a1": 1.0}, ("p2", "a1"): {"a1": -1.0},
               ("p2", "a2"): {"a2": 1.0}, ("p3", "a2"): {"a2": -1.0},
               ("p1", "u"): {"u": 1.0}, ("p3", "u"): {"u": -1.0},
               ("a1", "a2"): {"u": float(kappa)}}
    return BracketTable(entries, tuple(N3State(0, 0, 0, 0, 0, 0).coordinates()), float(kappa))


def gtl_table(N: int, kappa: float = 2.0) -> BracketTable:
    """
    The general table: {p_i, a_i} = a_i, {p_{i+1}, a_i} = -a_i (same for b),
    {p_{-1}, u} = u, {p_1, u} = -u, {p_{-1}, v} = v, {p_1, v} = -v,
    {a_{-1}, a_0} = kappa*v, {b_{-1}, b_0} = kappa*u.
    """
    entries = {}
    for k in range(-N, N):
        for x in ("a", "b"):
            entries[(f"p[{k}]", f"{x}[{k}]")] = {f"{x}[{k}]": 1.0}
            entries[(f"p[{k + 1}]", f"{x}[{k}]")] = {f"{x}[{k}]": -1.0}
    for x in ("u", "v"):
        entries[("p[-1]", x)] = {x: 1.0}
        entries[("p[1]", x)] = {x: -1.0}
    entries[("a[-1]", "a[0]")] = {"v": float(kappa)}
    entries[("b[-1]", "b[0]")] = {"u": float(kappa)}

    coords = GtlState(N, (0.0,)*(2*N + 1), (0.0,)*(2*N), (0.0,)*(2*N)).coordinates()
    return BracketTable(entries, tuple(coords), float(kappa))


# kappa values the flow-consistency oracle settles on (see resolve_kappa)
RESOLVED_KAPPA = {"n3": 1.0, "gtl": 2.0}
PRINTED_KAPPA = 2.0


def default_table(state, kappa: Optional[float] = None) -> BracketTable:
    match state:
        case N3State():
            return n3_table(RESOLVED_KAPPA["n3"] if kappa is None else kappa)
        case GtlState():
            return gtl_table(state.N, RESOLVED_KAPPA["gtl"] if kappa is None else kappa)
        case _:
            raise KindMismatchError(f"no Lie-Poisson table for state kind '{state.kind}'")


def bracket_coord(xi: str, xj: str, state, table: Optional[BracketTable] = None) -> float:
    table = default_table(state) if table is None else table
    return table.evaluate(xi, xj, state)


########################################################################################################
# observables
########################################################################################################
@dataclass(frozen=True)
class Observable:
    """
    A scalar function of a state with an optional analytic gradient (in coordinate order). Without
    one, the gradient is a central finite difference with step FD_STEP.
    """
    name: str
    fn: Callable
    grad_fn: Optional[Callable] = None

    def __call__(self, state) -> float:
        return float(self.fn(state))

    def gradient(self, state, analytic: bool = True) -> np.ndarray:
        if analytic and self.grad_fn is not None:
            return np.asarray(self.grad_fn(state), dtype=float)

        x = state.to_vector()
        g = np.zeros_like(x)
        for i in range(x.size):
            e = np.zeros_like(x); e[i] = FD_STEP
            g[i] = (self.fn(state.with_vector(x + e)) - self.fn(state.with_vector(x - e)))/(2*FD_STEP)
        return g

    def __mul__(self, other: "Observable") -> "Observable":
        grad = None
        if self.grad_fn is not None and other.grad_fn is not None:
            grad = lambda s: self(s)*other.gradient(s) + other(s)*self.gradient(s)
        return Observable(f"({self.name})*({other.name})", lambda s: self(s)*other(s), grad)


def quadratic_observable(A: npt.ArrayLike, b: npt.ArrayLike, name: str = "quad") -> Observable:
    """
    x -> x.A.x/2 + b.x with A symmetrized; analytic gradient A x + b.
    """
    A = np.asarray(A, dtype=float); b = np.asarray(b, dtype=float)
    A = 0.5*(A + A.T)
    return Observable(name, lambda s: 0.5*s.to_vector() @ A @ s.to_vector() + b @ s.to_vector(),
                      lambda s: A @ s.to_vector() + b)


def coordinate_observable(name: str) -> Observable:
    def grad(s):
        g = np.zeros(len(s.coordinates())); g[s.coordinate_index()[name]] = 1.0
        return g
    return Observable(name, lambda s: s.value_of(name), grad)


def _lax_rep(state) -> LaxRep:
    match state:
        case N3State():
            return LaxRep.N3_SYM
        case GtlState():
            return LaxRep.GTL_BANDED
        case _:
            raise KindMismatchError(f"trace invariants need an N3State or GtlState, got {state.kind}")


def hamiltonian(i: int) -> Observable:
    """
    H_i = tr(L^i)/i. The gradient is d H_i / d L = (L^{i-1})^T summed over the entries each
    coordinate occupies.
    """
    if i < 1:
        raise GtlLabError(f"H_i needs i >= 1, got {i}")

    def value(s):
        L = build_lax(s, _lax_rep(s)).L
        return np.trace(np.linalg.matrix_power(L, i))/i

    def grad(s):
        rep = _lax_rep(s)
        L = build_lax(s, rep).L
        Lp = np.linalg.matrix_power(L, i - 1)
        index = s.coordinate_index()
        g = np.zeros(len(index))
        for (r, c), name in entry_map(s, rep).items():
            g[index[name]] += Lp[c, r]
        return g

    return Observable(f"H{i}", value, grad)


def casimir_c2(coeff: float = 1.0) -> Observable:
    """
    C2 = a1*a2/u - coeff*p2 on the N=3 system (undefined at u = 0).
    """
    def value(s):
        return s.a1*s.a2/s.u - coeff*s.p2

    def grad(s):
        return np.array([0.0, -coeff, 0.0, s.a2/s.u, s.a1/s.u, -s.a1*s.a2/s.u**2])

    return Observable("C2", value, grad)


########################################################################################################
# bracket of functions, invariants
########################################################################################################
def bracket_fn(F: Observable, G: Observable, state, table: Optional[BracketTable] = None,
               analytic: bool = True) -> float:
    """
    {F, G} = sum_ij dF/dx_i dG/dx_j {x_i, x_j}
    """
    table = default_table(state) if table is None else table
    P = table.matrix(state)
    return float(F.gradient(state, analytic) @ P @ G.gradient(state, analytic))


@dataclass(frozen=True)
class InvariantSet:
    """
    H: (H_1, ..., H_kmax). C: Casimirs by name, None where undefined (u = 0). C4 only for n3q
    states, as a diagnostic.
    """
    H: Tuple[float, ...]
    C: Dict[str, Optional[float]]
    C4: Optional[float] = None

    def as_row(self) -> Dict[str, Optional[float]]:
        row = {f"H{i + 1}": h for i, h in enumerate(self.H)}
        row.update(self.C)
        if self.C4 is not None:
            row["C4"] = self.C4
        return row


def invariants(state, kmax: int = 3, c2_coeff: float = 1.0,
               params: RepParams = RepParams(), u_floor: float = 0.0) -> InvariantSet:
    """
    Trace invariants H_i = tr(L^i)/i and the Casimirs.

    Parameters:
    -----------
      - state: N3State, GtlState, or N3QState (mapped onto its N3State, plus C4)
      - kmax: highest H_i, at most 4
      - c2_coeff: coefficient of p2 in C2; 1 is the value the conservation oracle confirms
      - params: d3 is reported as C3 for the symmetric system
      - u_floor: C2 is reported as None when |u| <= u_floor (the ratio a1 a2/u loses its digits
        as u decays)
    """
    if not 1 <= kmax <= 4:
        raise GtlLabError(f"kmax must lie in 1..4, got {kmax}")

    C4 = None
    if isinstance(state, N3QState):
        C4 = c4_value(state)
        from .model import n3_from_n3q
        state = n3_from_n3q(state)

    H = tuple(hamiltonian(i)(state) for i in range(1, kmax + 1))
    C: Dict[str, Optional[float]] = {"C1": H[0]}

    match state:
        case N3State():
            if state.u == 0:
                C["C2"] = None; C["C3"] = None
            else:
                C["C2"] = casimir_c2(c2_coeff)(state) if abs(state.u) > u_floor else None
                C["C3"] = params.d3
        case GtlState():
            C["C3"] = state.v/state.u if state.u != 0 else None

    return InvariantSet(H, C, C4)


def c4_value(s: N3QState) -> float:
    """
    C4 = p4*q4 + alpha*exp(p4*q4), a diagnostic only.
    """
    x = s.p4*s.q4
    return float(x + s.alpha*np.exp(x))


def c4_series(trajectory) -> np.ndarray:
    """
    C4 along an N3_Q trajectory, one value per sample. It is not a constant of the motion in
    general; the series is reported, not asserted.
    """
    if not trajectory.states or not isinstance(trajectory.states[0], N3QState):
        raise KindMismatchError("c4_series needs a trajectory of N3QState samples")
    return np.array([c4_value(s) for s in trajectory.states])


def involution_matrix(state, kmax: int = 4, analytic: bool = True,
                      table: Optional[BracketTable] = None) -> np.ndarray:
    """
    |{H_i, H_j}| for i, j = 1..kmax.
    """
    if not 1 <= kmax <= 4:
        raise GtlLabError(f"kmax must lie in 1..4, got {kmax}")
    Hs = [hamiltonian(i) for i in range(1, kmax + 1)]
    out = np.zeros((kmax, kmax))
    for i in range(kmax):
        for j in range(i + 1, kmax):
            out[i, j] = out[j, i] = abs(bracket_fn(Hs[i], Hs[j], state, table, analytic))
    return out


def jacobi_residual(F: Observable, G: Observable, K: Observable, state,
                    table: Optional[BracketTable] = None) -> float:
    """
    |{F,{G,K}} + {G,{K,F}} + {K,{F,G}}|, the inner brackets differentiated by finite differences.
    """
    table = default_table(state) if table is None else table

    def inner(A, B):
        return Observable("inner", lambda s: bracket_fn(A, B, s, table))

    total = (bracket_fn(F, inner(G, K), state, table, analytic=False) +
             bracket_fn(G, inner(K, F), state, table, analytic=False) +
             bracket_fn(K, inner(F, G), state, table, analytic=False))
    return abs(total)


def casimir_residual(C: Observable, state, observables: Sequence[Observable],
                     table: Optional[BracketTable] = None) -> float:
    return max(abs(bracket_fn(C, G, state, table)) for G in observables)


########################################################################################################
# flow-consistency oracles
########################################################################################################
def hamiltonian_vector_field(state, table: BracketTable, sigma: int = SIGMA) -> np.ndarray:
    """
    dx/dt = sigma*{H2, x} for every coordinate x.
    """
    gradH = hamiltonian(2).gradient(state)
    P = table.matrix(state)
    return sigma*(gradH @ P)


def ham_flow_residual(state, kappa: float, sigma: int = SIGMA) -> float:
    """
    max_x |sigma*{H2, x} - rhs(state)_x| with the bracket table at the given kappa.
    """
    from .dynamics import FlowId, rhs

    flow = FlowId.N3 if isinstance(state, N3State) else FlowId.GTL
    field_ = hamiltonian_vector_field(state, default_table(state, kappa), sigma)
    return float(np.max(np.abs(field_ - rhs(state, flow))))


def resolve_kappa(states: Sequence) -> float:
    """
    Least-squares kappa matching sigma*{H2, x} to the flow over a set of states. The bracket is
    affine in kappa, so two evaluations per state determine it.
    """
    from .dynamics import FlowId, rhs

    num = 0.0; den = 0.0
    for s in states:
        flow = FlowId.N3 if isinstance(s, N3State) else FlowId.GTL
        f0 = hamiltonian_vector_field(s, default_table(s, 0.0))
        f1 = hamiltonian_vector_field(s, default_table(s, 1.0)) - f0
        target = rhs(s, flow) - f0
        num += float(f1 @ target); den += float(f1 @ f1)
    if den == 0.0:
        raise GtlLabError("kappa is not determined: the coupling term vanishes on every state given")
    kappa = num/den
    logger.info(f"flow-consistency oracle resolved kappa = {kappa:.15g}")
    return kappa


def resolve_sign(state: N3State) -> int:
    """
    Pin sigma by comparing {H2, p1} with the flow's dp1/dt at one non-degenerate state.
    """
    from .dynamics import FlowId, rhs

    bracket = hamiltonian_vector_field(state, default_table(state), sigma=1)[0]
    flow = rhs(state, FlowId.N3)[0]
    if bracket == 0 or flow == 0:
        raise GtlLabError("sign convention needs a state with dp1/dt != 0")
    return 1 if np.sign(bracket) == np.sign(flow) else -1
