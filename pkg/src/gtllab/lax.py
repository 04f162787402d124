"""
Lax representations of the lattice, matrix commutators, spectra and the classical r-matrix check.

Tensor convention: for A (x) B the composite row of the index pair (i, k) is i*N + k (0-based),
and likewise for columns, i.e. (A (x) B)[i*N + k, j*N + l] = A[i, j] * B[k, l]. This is what
numpy.kron produces and it is used for every tensor in this module.
"""
from dataclasses import dataclass, field
from enum import Enum
import logging
import numpy as np
import numpy.typing as npt
from typing import Dict, List, Optional, Tuple
from .errors import ConvergenceError, GtlLabError, KindMismatchError
from .states import CdwState, GtlState, N3QState, N3State, PQState, RepParams, TodaState
from .utils import check_square

logger = logging.getLogger(__name__)


class LaxRep(str, Enum):
    TL_2x2 = "TL_2x2"
    GTL_BANDED = "GTL_BANDED"
    N3_SYM = "N3_SYM"
    N3_Q = "N3_Q"
    N3_PQ = "N3_PQ"
    CDW = "CDW"


# which state kind each representation is built from
REP_STATE_KIND = {
    LaxRep.TL_2x2: TodaState,
    LaxRep.GTL_BANDED: GtlState,
    LaxRep.N3_SYM: N3State,
    LaxRep.N3_Q: N3QState,
    LaxRep.N3_PQ: PQState,
    LaxRep.CDW: CdwState,
}


@dataclass(frozen=True)
class LaxPair:
    L: np.ndarray
    M: np.ndarray
    rep: LaxRep
    lam: Optional[float] = None

    def __post_init__(self):
        L = check_square(self.L, "L"); M = check_square(self.M, "M")
        if L.shape != M.shape:
            raise GtlLabError(f"L and M must have the same dimension, got {L.shape} and {M.shape}")


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: Tuple[complex, ...]
    method: str

    @property
    def real(self) -> np.ndarray:
        return np.real(np.asarray(self.eigenvalues))

    def to_dict(self) -> dict:
        vals = [float(np.real(z)) if np.imag(z) == 0 else [float(np.real(z)), float(np.imag(z))]
                for z in self.eigenvalues]
        return {"eigenvalues": vals, "method": self.method}


@dataclass(frozen=True)
class RMatrix:
    N: int
    entries: np.ndarray = field(repr=False)

    @property
    def transposed(self) -> np.ndarray:
        """
        r^T, the tensor with its two factors swapped. For matrix-unit tensors this coincides with
        the ordinary transpose of the N^2 x N^2 array.
        """
        return self.entries.T.copy()


def _rep(rep) -> LaxRep:
    try:
        return LaxRep(rep)
    except ValueError:
        raise GtlLabError(f"Unknown Lax representation '{rep}'. Choose from "
                          f"{[r.value for r in LaxRep]}") from None


def _strict_upper_minus_lower(L: np.ndarray) -> np.ndarray:
    return np.triu(L, 1) - np.tril(L, -1)


def similarity_conjugate(L: npt.ArrayLike, diag: npt.ArrayLike) -> np.ndarray:
    """
    D^{-1} L D for D = diag(diag). With the scaling of asymmetric_scaling this turns the N3_Q and
    N3_PQ matrices into symmetric ones with the same spectrum.
    """
    L = np.asarray(L, dtype=float); diag = np.asarray(diag, dtype=float)
    if np.any(diag == 0):
        raise GtlLabError("similarity_conjugate needs a nonsingular diagonal")
    return L*diag[np.newaxis, :]/diag[:, np.newaxis]


def asymmetric_scaling(params: RepParams) -> np.ndarray:
    """
    diag(1, sqrt(d1), sqrt(d1*d2)), defined for d1, d2 > 0.
    """
    if params.d1 <= 0 or params.d2 <= 0:
        raise GtlLabError(f"asymmetric_scaling needs d1, d2 > 0, got d1={params.d1}, d2={params.d2}")
    return np.array([1.0, np.sqrt(params.d1), np.sqrt(params.d1*params.d2)])


########################################################################################################
# builders
########################################################################################################
def tl_site_pair(s: TodaState, n: int, lam: float = 0.0, as_printed: bool = False):
    """
    (L_n, M_n) of the 2x2 discrete pair for site n (1-based, n = 1..N+1; only M is meaningful at
    N+1).

    The default pair is
        L_n = [[lam - p_n, exp(-q_n)], [-exp(q_n), 0]],  M_n = [[0, -exp(-q_n)], [exp(q_{n-1}), lam]]
    whose compatibility condition is exactly q_n'' = exp(q_{n-1} - q_n) - exp(q_n - q_{n+1}). On an
    open chain exp(q_0) = 0 and exp(-q_{N+1}) = 0. With as_printed=True the printed pair
        L_n = [[p_n + lam, exp(q_n)], [-exp(-q_n), 0]],  M_n = [[0, -exp(q_n)], [exp(-q_n), lam]]
    is returned instead; it only exists for sites 1..N.
    """
    N = s.N
    if not 1 <= n <= N + 1:
        raise GtlLabError(f"site index n must lie in 1..{N + 1}, got {n}")
    if as_printed and n > N:
        raise GtlLabError("the printed pair has no M_{N+1} on a chain of N sites")

    periodic = s.boundary == "periodic"

    def q(k):
        return s.q[(k - 1) % N]

    def exp_q(k):
        # exp(q_k), 0 below the open end
        if k < 1 and not periodic:
            return 0.0
        return float(np.exp(q(k)))

    def exp_mq(k):
        # exp(-q_k), 0 above the open end
        if k > N and not periodic:
            return 0.0
        return float(np.exp(-q(k)))

    if as_printed:
        qn = s.q[n - 1]; pn = s.p[n - 1]
        L = np.array([[pn + lam, np.exp(qn)], [-np.exp(-qn), 0.0]])
        M = np.array([[0.0, -np.exp(qn)], [np.exp(-qn), lam]])
        return L, M

    pn = s.p[n - 1] if n <= N else (s.p[(n - 1) % N] if periodic else 0.0)
    L = np.array([[lam - pn, exp_mq(n)], [-exp_q(n), 0.0]])
    M = np.array([[0.0, -exp_mq(n)], [exp_q(n - 1), lam]])
    return L, M


def _gtl_matrices(s: GtlState) -> Tuple[np.ndarray, np.ndarray]:
    n = s.dim
    L = np.diag(np.asarray(s.p)) + np.diag(np.asarray(s.a), 1) + np.diag(np.asarray(s.b), -1)
    M = np.diag(np.asarray(s.a), 1) - np.diag(np.asarray(s.b), -1)

    # sites -1 and +1 sit at rows N-1 and N+1
    i, j = s.N - 1, s.N + 1
    L[i, j] = s.v; L[j, i] = s.u
    M[i, j] = s.v; M[j, i] = -s.u
    assert L.shape == (n, n)
    return L, M


def _n3_asym_L(p, a1, a2, u, d1, d2) -> np.ndarray:
    return np.array([[p[0], a1, u],
                     [d1*a1, p[1], a2],
                     [d1*d2*u, d2*a2, p[2]]])


def build_lax(state, rep, params: RepParams = RepParams(), site: int = 1,
              as_printed: bool = False) -> LaxPair:
    """
    Build the (L, M) pair of a representation from a state of the matching kind.

    Parameters:
    -----------
      - state: TodaState (TL_2x2), GtlState (GTL_BANDED), N3State (N3_SYM), N3QState (N3_Q),
        PQState (N3_PQ) or CdwState (CDW)
      - rep: LaxRep or its string value
      - params: RepParams with d1, d2 (asymmetric N=3 forms) and lam (2x2 pair)
      - site: site n of the 2x2 pair, 1-based. At site 1 of an open chain exp(q_0) = 0 leaves
        M_1[1, 0] = 0; interior sites and periodic chains carry exp(q_{n-1}) there
      - as_printed: 2x2 pair only, return the pair exactly as printed rather than the compatible one
    """
    rep = _rep(rep)
    expected = REP_STATE_KIND[rep]
    if not isinstance(state, expected):
        raise KindMismatchError(f"{rep.value} is built from a {expected.__name__}, got "
                                f"{type(state).__name__}")

    if rep in (LaxRep.N3_Q, LaxRep.N3_PQ) and (params.d1 == 0 or params.d2 == 0):
        raise GtlLabError(f"{rep.value} needs nonzero d1 and d2, got d1={params.d1}, d2={params.d2}")

    match rep:
        case LaxRep.TL_2x2:
            L, M = tl_site_pair(state, site, params.lam, as_printed)
            return LaxPair(L, M, rep, params.lam)

        case LaxRep.GTL_BANDED:
            L, M = _gtl_matrices(state)

        case LaxRep.N3_SYM:
            s = state
            L = np.array([[s.p1, s.a1, s.u], [s.a1, s.p2, s.a2], [s.u, s.a2, s.p3]])
            M = _strict_upper_minus_lower(L)

        case LaxRep.N3_Q:
            s = state
            L = _n3_asym_L(s.p, s.a1, s.a2, s.u, params.d1, params.d2)
            M = _strict_upper_minus_lower(L)

        case LaxRep.N3_PQ:
            P = state.P; Q = state.Q
            e1 = np.exp(Q[0]); e2 = np.exp(Q[1]); e12 = np.exp(Q[0] + Q[1])
            d1, d2 = params.d1, params.d2
            L = np.array([[P[0], e1*P[2], e12],
                          [d1*e1*P[3], P[1] - P[0], e2*Q[2]],
                          [d1*d2*e12, d2*e2*Q[3], -P[1]]])
            M = _strict_upper_minus_lower(L)

        case LaxRep.CDW:
            c = state.c
            L = np.array([[c[0], state.d2, state.w],
                          [1.0, c[1], state.d3],
                          [0.0, 1.0, c[2]]])
            M = np.array([[c[0], 1.0, 0.0],
                          [0.0, c[1], 1.0],
                          [0.0, 0.0, c[2]]])

    return LaxPair(L, M, rep)


def entry_map(state, rep) -> Dict[Tuple[int, int], str]:
    """
    Which coordinate sits in which entry of L, for representations whose entries are single
    coordinates. Entries not listed are constant zero.
    """
    rep = _rep(rep)
    match rep:
        case LaxRep.N3_SYM:
            return {(0, 0): "p1", (1, 1): "p2", (2, 2): "p3",
                    (0, 1): "a1", (1, 0): "a1", (1, 2): "a2", (2, 1): "a2",
                    (0, 2): "u", (2, 0): "u"}
        case LaxRep.GTL_BANDED:
            N = state.N
            entries = {}
            for k in state.sites:
                entries[(k + N, k + N)] = f"p[{k}]"
            for k in range(-N, N):
                entries[(k + N, k + N + 1)] = f"a[{k}]"
                entries[(k + N + 1, k + N)] = f"b[{k}]"
            entries[(N - 1, N + 1)] = "v"
            entries[(N + 1, N - 1)] = "u"
            return entries
        case LaxRep.CDW:
            return {(0, 0): "c0", (1, 1): "c1", (2, 2): "c2", (0, 1): "d2", (1, 2): "d3", (0, 2): "w"}
        case _:
            raise GtlLabError(f"{rep.value} has no entry-to-coordinate projection")


########################################################################################################
# commutators and closure
########################################################################################################
def commutator(A: npt.ArrayLike, B: npt.ArrayLike) -> np.ndarray:
    """
    [A, B] = AB - BA
    """
    A = check_square(A, "A"); B = check_square(B, "B")
    if A.shape != B.shape:
        raise GtlLabError(f"commutator needs matrices of equal dimension, got {A.shape} and {B.shape}")
    return A @ B - B @ A


def closure_report(L: np.ndarray, M: np.ndarray, pattern, order: str = "LM") -> dict:
    """
    Worst entry of the commutator outside a sparsity pattern.

    Parameters:
    -----------
      - L, M: the Lax pair
      - pattern: iterable of (i, j) entries allowed to be nonzero
      - order: "LM" for [L, M], "ML" for [M, L]
    """
    C = commutator(L, M) if order == "LM" else commutator(M, L)
    mask = np.ones(C.shape, dtype=bool)
    for (i, j) in pattern:
        mask[i, j] = False

    outside = np.where(mask, np.abs(C), 0.0)
    i, j = np.unravel_index(np.argmax(outside), outside.shape)
    return {"order": order, "max_outside": float(outside[i, j]), "entry": (int(i), int(j)),
            "value": float(C[i, j])}


def discrete_lax_residual(s: TodaState, lam: float, qdot: npt.ArrayLike, pdot: npt.ArrayLike,
                          as_printed: bool = False) -> float:
    """
    max_n || dL_n/dt + L_n M_n - M_{n+1} L_n ||_inf for candidate time derivatives (qdot, pdot).

    dL_n/dt is assembled by differentiating the entries of L_n. With the default pair every site
    n = 1..N is checked (M_{N+1} exists); the printed pair is checked on interior sites 1..N-1.
    """
    qdot = np.asarray(qdot, dtype=float); pdot = np.asarray(pdot, dtype=float)
    N = s.N
    last = N - 1 if as_printed else N

    worst = 0.0
    for n in range(1, last + 1):
        L, M = tl_site_pair(s, n, lam, as_printed)
        _, M_next = tl_site_pair(s, n + 1, lam, as_printed)
        qn = s.q[n - 1]; qd = qdot[n - 1]; pd = pdot[n - 1]
        if as_printed:
            Ldot = np.array([[pd, qd*np.exp(qn)], [qd*np.exp(-qn), 0.0]])
        else:
            Ldot = np.array([[-pd, -qd*np.exp(-qn)], [-qd*np.exp(qn), 0.0]])
        R = Ldot + L @ M - M_next @ L
        worst = max(worst, float(np.max(np.abs(R))))
    return worst


########################################################################################################
# spectra
########################################################################################################
def _charpoly2(A: np.ndarray) -> List[complex]:
    tr = A[0, 0] + A[1, 1]
    det = A[0, 0]*A[1, 1] - A[0, 1]*A[1, 0]
    disc = np.sqrt(complex(tr*tr/4 - det))
    return [tr/2 - disc, tr/2 + disc]


def _charpoly3(A: np.ndarray, symmetric: bool) -> List[complex]:
    # det(xI - A) = x^3 + c2 x^2 + c1 x + c0
    tr = np.trace(A)
    c2 = -tr
    c1 = 0.5*(tr*tr - np.trace(A @ A))
    c0 = -np.linalg.det(A)

    # depressed cubic y^3 + P y + Q = 0 with x = y - c2/3
    shift = -c2/3.0
    P = c1 - c2*c2/3.0
    Q = 2.0*c2**3/27.0 - c2*c1/3.0 + c0

    if symmetric or (P < 0 and 4*P**3 + 27*Q**2 <= 0):
        # three real roots, trigonometric form
        m = np.sqrt(max(-P/3.0, 0.0))
        if m == 0.0:
            return [complex(shift)]*3
        arg = np.clip(-Q/(2.0*m**3), -1.0, 1.0)
        theta = np.arccos(arg)/3.0
        return [complex(shift + 2.0*m*np.cos(theta - 2.0*np.pi*k/3.0)) for k in range(3)]

    # Cardano with complex cube roots
    root = np.sqrt(complex(Q*Q/4.0 + P**3/27.0))
    cu = -Q/2.0 + root
    if abs(cu) < abs(-Q/2.0 - root):
        cu = -Q/2.0 - root
    if cu == 0:
        return [complex(shift)]*3
    w = cu**(1.0/3.0)
    omega = np.exp(2j*np.pi/3.0)
    roots = []
    for k in range(3):
        y = w*omega**k
        roots.append(shift + y - P/(3.0*y))
    return roots


def _jacobi(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60) -> List[complex]:
    """
    Cyclic Jacobi rotations on a symmetric matrix until the off-diagonal part is below
    tol * ||A||_F.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    scale = max(np.linalg.norm(A), 1.0)

    for sweep in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1)**2))
        if off <= tol*scale:
            return [complex(v) for v in np.diag(A)]

        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p])/(2.0*A[p, q])
                t = np.sign(theta)/(abs(theta) + np.sqrt(theta*theta + 1.0)) if theta != 0 else 1.0
                c = 1.0/np.sqrt(t*t + 1.0); s = t*c

                J = np.eye(n)
                J[p, p] = c; J[q, q] = c
                J[p, q] = s; J[q, p] = -s
                A = J.T @ A @ J

    raise ConvergenceError("cyclic Jacobi did not reduce the off-diagonal part below tolerance",
                           max_sweeps)


def spectrum(L: npt.ArrayLike) -> Spectrum:
    """
    Eigenvalues of L sorted by (real, imag). 2x2 and 3x3 matrices go through their characteristic
    polynomials in closed form, larger symmetric matrices through cyclic Jacobi.
    """
    A = check_square(np.asarray(L, dtype=float), "L", min_dim=2)
    n = A.shape[0]
    symmetric = bool(np.allclose(A, A.T, rtol=0.0, atol=1e-14*max(1.0, np.max(np.abs(A)))))

    if n == 2:
        vals, method = _charpoly2(A), "charpoly2"
    elif n == 3:
        vals, method = _charpoly3(A, symmetric), "charpoly3"
    elif symmetric:
        vals, method = _jacobi(0.5*(A + A.T)), "jacobi"
    else:
        raise GtlLabError(f"spectrum of a nonsymmetric {n}x{n} matrix is not supported; the "
                          "asymmetric representations are all 3x3")

    if symmetric:
        vals = [complex(np.real(v)) for v in vals]
    return Spectrum(tuple(sorted(vals, key=lambda z: (z.real, z.imag))), method)


########################################################################################################
# r-matrix
########################################################################################################
def matrix_unit(i: int, j: int, N: int) -> np.ndarray:
    E = np.zeros((N, N), dtype=int)
    E[i, j] = 1
    return E


def commutation_table(N: int) -> Dict[Tuple[Tuple[int, int], Tuple[int, int]], List[Tuple[int, Tuple[int, int]]]]:
    """
    Structure constants of gl(N) in the matrix-unit basis:
        [E_ij, E_kl] = delta_jk E_il - delta_li E_kj
    as a map ((i, j), (k, l)) -> [(coefficient, (a, b)), ...], zero commutators omitted.
    """
    table = {}
    units = [(i, j) for i in range(N) for j in range(N)]
    for (i, j) in units:
        for (k, l) in units:
            terms = []
            if j == k:
                terms.append((1, (i, l)))
            if l == i:
                terms.append((-1, (k, j)))
            # E_ii with E_ii: both terms cancel
            if len(terms) == 2 and terms[0][1] == terms[1][1]:
                terms = []
            if terms:
                table[((i, j), (k, l))] = terms
    return table


def r_matrix(N: int) -> RMatrix:
    """
    r = sum_i E_ii (x) E_ii + 2 sum_{i<j} E_ij (x) E_ji as an integer N^2 x N^2 array.
    """
    if N < 2:
        raise GtlLabError(f"r_matrix needs N >= 2, got {N}")
    r = np.zeros((N*N, N*N), dtype=int)
    for i in range(N):
        r[i*N + i, i*N + i] = 1
        for j in range(i + 1, N):
            r[i*N + j, j*N + i] = 2
    return RMatrix(N, r)


def bracket_tensor(state, rep, bracket_table) -> np.ndarray:
    """
    {L (x), L}: entry (i*N + k, j*N + l) is {L_ij, L_kl}, a table lookup because every entry of
    L is a single coordinate or the constant 0.
    """
    L = build_lax(state, rep).L
    N = L.shape[0]
    entries = entry_map(state, rep)
    T = np.zeros((N*N, N*N))
    for (i, j), x in entries.items():
        for (k, l), y in entries.items():
            T[i*N + k, j*N + l] = bracket_table.evaluate(x, y, state)
    return T


def r_matrix_residual(state, bracket_table=None, form: str = "rt") -> float:
    """
    || {L (x), L} - RHS ||_inf with
        form="rt":  RHS = [r, L (x) I] - [r^T, I (x) L]
        form="sum": RHS = [r, L (x) I + I (x) L]
    The value is measured, never presumed to vanish.
    """
    rep = LaxRep.GTL_BANDED if isinstance(state, GtlState) else LaxRep.N3_SYM
    if bracket_table is None:
        from .poisson import default_table
        bracket_table = default_table(state)

    L = build_lax(state, rep).L
    N = L.shape[0]
    I = np.eye(N)
    L1 = np.kron(L, I); L2 = np.kron(I, L)
    r = r_matrix(N)

    match form:
        case "rt":
            rhs = commutator(r.entries, L1) - commutator(r.transposed, L2)
        case "sum":
            rhs = commutator(r.entries, L1 + L2)
        case _:
            raise GtlLabError(f"Unknown r-matrix form '{form}'. Choose 'rt' or 'sum'.")

    lhs = bracket_tensor(state, rep, bracket_table)
    return float(np.max(np.abs(lhs - rhs)))
