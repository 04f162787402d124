"""
State objects for the classic Toda lattice: physical (q, p) coordinates and the two Flaschka
forms.
"""
from dataclasses import dataclass
import numpy as np
import numpy.typing as npt
from typing import List, Literal, Tuple
from ..core import StateBase
from ..errors import ConfigError


Boundary = Literal["open", "periodic"]


@dataclass(frozen=True)
class TodaState(StateBase):
    """
    Positions q_1..q_N and momenta p_1..p_N of the classic lattice.

    Parameters:
    -----------
      - q: positions, length N >= 2
      - p: momenta, same length as q
      - boundary: "open" (no neighbour past either end) or "periodic" (q_{N+1} = q_1)
    """
    q: Tuple[float, ...]
    p: Tuple[float, ...]
    boundary: Boundary = "open"

    kind = "toda"

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float); p = np.asarray(self.p, dtype=float)
        if q.shape != p.shape:
            raise ConfigError(f"q and p must have the same shape, got {q.shape} and {p.shape}")
        if q.ndim != 1 or q.size < 2:
            raise ConfigError(f"TodaState needs N >= 2 sites, got {q.size}")
        if self.boundary not in ("open", "periodic"):
            raise ConfigError(f"boundary must be 'open' or 'periodic', got '{self.boundary}'")
        object.__setattr__(self, "q", tuple(float(v) for v in q))
        object.__setattr__(self, "p", tuple(float(v) for v in p))
        self.check_finite()

    @property
    def N(self) -> int:
        return len(self.q)

    def coordinates(self) -> List[str]:
        return [f"q{n}" for n in range(1, self.N + 1)] + [f"p{n}" for n in range(1, self.N + 1)]

    def to_vector(self) -> np.ndarray:
        return np.array(self.q + self.p, dtype=float)

    def with_vector(self, x: npt.ArrayLike) -> "TodaState":
        x = np.asarray(x, dtype=float)
        return TodaState(tuple(x[:self.N]), tuple(x[self.N:]), self.boundary)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "q": list(self.q), "p": list(self.p), "boundary": self.boundary}

    @classmethod
    def from_dict(cls, doc: dict) -> "TodaState":
        return cls(tuple(doc["q"]), tuple(doc["p"]), doc.get("boundary", "open"))


@dataclass(frozen=True)
class FlaschkaState(StateBase):
    """
    Flaschka variables of an open chain. variant "alpha_beta" stores (alpha_n, beta_n), variant
    "a_b" stores (a_n, b_n). first has N-1 off-diagonal entries, second has N diagonal entries.
    """
    variant: Literal["alpha_beta", "a_b"]
    first: Tuple[float, ...]
    second: Tuple[float, ...]

    kind = "flaschka"

    def __post_init__(self):
        if self.variant not in ("alpha_beta", "a_b"):
            raise ConfigError(f"Flaschka variant must be 'alpha_beta' or 'a_b', got '{self.variant}'")
        if len(self.first) != len(self.second) - 1:
            raise ConfigError(f"open-chain Flaschka state needs len(first) == len(second) - 1, got "
                              f"{len(self.first)} and {len(self.second)}")
        object.__setattr__(self, "first", tuple(float(v) for v in self.first))
        object.__setattr__(self, "second", tuple(float(v) for v in self.second))
        self.check_finite()

    @property
    def N(self) -> int:
        return len(self.second)

    def _names(self) -> Tuple[str, str]:
        return ("alpha", "beta") if self.variant == "alpha_beta" else ("a", "b")

    def coordinates(self) -> List[str]:
        off, diag = self._names()
        return ([f"{off}{n}" for n in range(1, self.N)] +
                [f"{diag}{n}" for n in range(1, self.N + 1)])

    def to_vector(self) -> np.ndarray:
        return np.array(self.first + self.second, dtype=float)

    def with_vector(self, x: npt.ArrayLike) -> "FlaschkaState":
        x = np.asarray(x, dtype=float)
        return FlaschkaState(self.variant, tuple(x[:self.N - 1]), tuple(x[self.N - 1:]))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "variant": self.variant, "first": list(self.first),
                "second": list(self.second)}

    @classmethod
    def from_dict(cls, doc: dict) -> "FlaschkaState":
        return cls(doc["variant"], tuple(doc["first"]), tuple(doc["second"]))
