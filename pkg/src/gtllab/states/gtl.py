"""
State objects for the generalized lattice: the general container on sites -N..N, the symmetric
N=3 case, its q-coordinate and (P,Q) forms, and the c/d/w variables used to build tau functions.
"""
from dataclasses import dataclass
import numpy as np
import numpy.typing as npt
from typing import List, Tuple
from ..core import StateBase
from ..errors import ConfigError


def _floats(values) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class GtlState(StateBase):
    """
    Generalized Toda lattice on sites k = -N..N.

    Parameters:
    -----------
      - N: half-width, N >= 1, giving 2N+1 sites
      - p: diagonal momenta p_{-N}..p_N (length 2N+1)
      - a: upper couplings a_{-N}..a_{N-1} (length 2N)
      - b: lower couplings b_{-N}..b_{N-1} (length 2N)
      - u, v: the extra couplings between sites -1 and +1 (u below the diagonal, v above)
    """
    N: int
    p: Tuple[float, ...]
    a: Tuple[float, ...]
    b: Tuple[float, ...]
    u: float = 0.0
    v: float = 0.0

    kind = "gtl"

    def __post_init__(self):
        if int(self.N) < 1:
            raise ConfigError(f"GtlState needs N >= 1, got {self.N}")
        N = int(self.N)
        if len(self.p) != 2*N + 1 or len(self.a) != 2*N or len(self.b) != 2*N:
            raise ConfigError(f"GtlState with N={N} needs len(p)={2*N + 1}, len(a)=len(b)={2*N}; got "
                              f"{len(self.p)}, {len(self.a)}, {len(self.b)}")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "p", _floats(self.p))
        object.__setattr__(self, "a", _floats(self.a))
        object.__setattr__(self, "b", _floats(self.b))
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "v", float(self.v))
        self.check_finite()

    @property
    def is_classic(self) -> bool:
        return self.u == 0.0 and self.v == 0.0

    @property
    def sites(self) -> range:
        return range(-self.N, self.N + 1)

    @property
    def dim(self) -> int:
        return 2*self.N + 1

    def p_at(self, k: int) -> float:
        """
        p_k for a site label k, 0 for labels outside -N..N (open chain).
        """
        return self.p[k + self.N] if -self.N <= k <= self.N else 0.0

    def a_at(self, k: int) -> float:
        return self.a[k + self.N] if -self.N <= k <= self.N - 1 else 0.0

    def b_at(self, k: int) -> float:
        return self.b[k + self.N] if -self.N <= k <= self.N - 1 else 0.0

    def coordinates(self) -> List[str]:
        return ([f"p[{k}]" for k in self.sites] +
                [f"a[{k}]" for k in range(-self.N, self.N)] +
                [f"b[{k}]" for k in range(-self.N, self.N)] + ["u", "v"])

    def to_vector(self) -> np.ndarray:
        return np.array(self.p + self.a + self.b + (self.u, self.v), dtype=float)

    def with_vector(self, x: npt.ArrayLike) -> "GtlState":
        x = np.asarray(x, dtype=float)
        n_p = self.dim; n_a = 2*self.N
        return GtlState(self.N, tuple(x[:n_p]), tuple(x[n_p:n_p + n_a]),
                        tuple(x[n_p + n_a:n_p + 2*n_a]), x[-2], x[-1])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "N": self.N, "p": list(self.p), "a": list(self.a),
                "b": list(self.b), "u": self.u, "v": self.v}

    @classmethod
    def from_dict(cls, doc: dict) -> "GtlState":
        return cls(doc["N"], tuple(doc["p"]), tuple(doc["a"]), tuple(doc["b"]),
                   doc.get("u", 0.0), doc.get("v", 0.0))


@dataclass(frozen=True)
class N3State(StateBase):
    """
    The symmetric three-site system: b_k = a_k and v = u.
    """
    p1: float
    p2: float
    p3: float
    a1: float
    a2: float
    u: float

    kind = "n3"

    def __post_init__(self):
        for name in ("p1", "p2", "p3", "a1", "a2", "u"):
            object.__setattr__(self, name, float(getattr(self, name)))
        self.check_finite()

    @property
    def p(self) -> Tuple[float, float, float]:
        return (self.p1, self.p2, self.p3)

    @property
    def a(self) -> Tuple[float, float]:
        return (self.a1, self.a2)

    def coordinates(self) -> List[str]:
        return ["p1", "p2", "p3", "a1", "a2", "u"]

    def to_vector(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3, self.a1, self.a2, self.u], dtype=float)

    def with_vector(self, x: npt.ArrayLike) -> "N3State":
        return N3State(*np.asarray(x, dtype=float))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "p": list(self.p), "a": list(self.a), "u": self.u}

    @classmethod
    def from_dict(cls, doc: dict) -> "N3State":
        p = doc["p"]; a = doc["a"]
        if len(p) != 3 or len(a) != 2:
            raise ConfigError(f"n3 state needs 3 momenta and 2 couplings, got {len(p)} and {len(a)}")
        return cls(p[0], p[1], p[2], a[0], a[1], doc["u"])


@dataclass(frozen=True)
class N3QState(StateBase):
    """
    The N=3 system in position coordinates with the auxiliary pair (p4, q4):
    a1 = exp(q1 - q2) p4, a2 = exp(q2 - q3) q4, u = u0 exp(q1 - q3).

    u0 and alpha are constants of the motion (alpha only enters the C4 diagnostic).
    """
    q: Tuple[float, float, float]
    p: Tuple[float, float, float]
    p4: float
    q4: float
    u0: float = 1.0
    alpha: float = 0.0

    kind = "n3q"

    def __post_init__(self):
        if len(self.q) != 3 or len(self.p) != 3:
            raise ConfigError("n3q state needs exactly three q and three p values")
        object.__setattr__(self, "q", _floats(self.q))
        object.__setattr__(self, "p", _floats(self.p))
        for name in ("p4", "q4", "u0", "alpha"):
            object.__setattr__(self, name, float(getattr(self, name)))
        self.check_finite()

    @property
    def a1(self) -> float:
        return float(np.exp(self.q[0] - self.q[1]) * self.p4)

    @property
    def a2(self) -> float:
        return float(np.exp(self.q[1] - self.q[2]) * self.q4)

    @property
    def u(self) -> float:
        return float(self.u0 * np.exp(self.q[0] - self.q[2]))

    def coordinates(self) -> List[str]:
        return ["q1", "q2", "q3", "p1", "p2", "p3", "p4", "q4"]

    def to_vector(self) -> np.ndarray:
        return np.array(self.q + self.p + (self.p4, self.q4), dtype=float)

    def with_vector(self, x: npt.ArrayLike) -> "N3QState":
        x = np.asarray(x, dtype=float)
        return N3QState(tuple(x[:3]), tuple(x[3:6]), x[6], x[7], self.u0, self.alpha)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "q": list(self.q), "p": list(self.p), "p4": self.p4,
                "q4": self.q4, "u0": self.u0, "alpha": self.alpha}

    @classmethod
    def from_dict(cls, doc: dict) -> "N3QState":
        return cls(tuple(doc["q"]), tuple(doc["p"]), doc["p4"], doc["q4"], doc.get("u0", 1.0),
                   doc.get("alpha", 0.0))


@dataclass(frozen=True)
class PQState(StateBase):
    """
    Canonical pairs (P_i, Q_i), i = 1..4, feeding the (P,Q) form of the N=3 Lax matrix.
    """
    P: Tuple[float, float, float, float]
    Q: Tuple[float, float, float, float]

    kind = "pq"

    def __post_init__(self):
        if len(self.P) != 4 or len(self.Q) != 4:
            raise ConfigError("pq state needs four P and four Q values")
        object.__setattr__(self, "P", _floats(self.P))
        object.__setattr__(self, "Q", _floats(self.Q))
        self.check_finite()

    def coordinates(self) -> List[str]:
        return [f"P{i}" for i in range(1, 5)] + [f"Q{i}" for i in range(1, 5)]

    def to_vector(self) -> np.ndarray:
        return np.array(self.P + self.Q, dtype=float)

    def with_vector(self, x: npt.ArrayLike) -> "PQState":
        x = np.asarray(x, dtype=float)
        return PQState(tuple(x[:4]), tuple(x[4:]))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "P": list(self.P), "Q": list(self.Q)}

    @classmethod
    def from_dict(cls, doc: dict) -> "PQState":
        return cls(tuple(doc["P"]), tuple(doc["Q"]))


@dataclass(frozen=True)
class CdwState(StateBase):
    """
    The c/d/w variables: c = (c0, c1, c2) are the momenta (matrix labelling of the spectral
    problem), d2 = a1^2, d3 = a2^2, w = u^2 at rescaled time.

    branch is the sign of u*a1*a2, which the squares forget and the coupling terms of the flow
    need back.
    """
    c: Tuple[float, float, float]
    d2: float
    d3: float
    w: float
    branch: int = 1

    kind = "cdw"

    def __post_init__(self):
        if len(self.c) != 3:
            raise ConfigError(f"cdw state needs three c values, got {len(self.c)}")
        if self.branch not in (1, -1):
            raise ConfigError(f"cdw branch must be +1 or -1, got {self.branch}")
        object.__setattr__(self, "c", _floats(self.c))
        for name in ("d2", "d3", "w"):
            object.__setattr__(self, name, float(getattr(self, name)))
        self.check_finite()

    def coordinates(self) -> List[str]:
        return ["c0", "c1", "c2", "d2", "d3", "w"]

    def to_vector(self) -> np.ndarray:
        return np.array(self.c + (self.d2, self.d3, self.w), dtype=float)

    def with_vector(self, x: npt.ArrayLike) -> "CdwState":
        x = np.asarray(x, dtype=float)
        return CdwState(tuple(x[:3]), x[3], x[4], x[5], self.branch)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "c": list(self.c), "d2": self.d2, "d3": self.d3, "w": self.w,
                "branch": self.branch}

    @classmethod
    def from_dict(cls, doc: dict) -> "CdwState":
        return cls(tuple(doc["c"]), doc["d2"], doc["d3"], doc["w"], int(doc.get("branch", 1)))
