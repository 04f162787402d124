from abc import ABC, abstractmethod
import logging
import numpy as np
import numpy.typing as npt
from typing import ClassVar, Dict, List, Type
from .errors import ConfigError, DomainError

logger = logging.getLogger(__name__)


# every concrete state registers itself here under its JSON "kind" tag
STATE_KINDS: Dict[str, Type["StateBase"]] = {}


class StateBase(ABC):
    """
    The base class governing what every state representation of the lattice has to provide. All
    state types (Toda, Flaschka, GTL, N=3, q-coordinates, (P,Q), c/d/w) inherit from StateBase.

    A state is an immutable value object. It exposes its coordinates as an ordered list of names
    and a flat float vector in that order, which is what the integrators, the bracket engine and
    the Lax projections work with.
    """
    kind: ClassVar[str] = ""

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if cls.kind:
            STATE_KINDS[cls.kind] = cls

    @abstractmethod
    def coordinates(self) -> List[str]:
        """
        Ordered coordinate names, e.g. ["p1", "p2", "p3", "a1", "a2", "u"].
        """
        pass

    @abstractmethod
    def to_vector(self) -> np.ndarray:
        pass

    @abstractmethod
    def with_vector(self, x: npt.ArrayLike) -> "StateBase":
        """
        Return a new state of the same kind (same constants) whose coordinates are x.
        """
        pass

    @abstractmethod
    def to_dict(self) -> dict:
        pass

    @classmethod
    @abstractmethod
    def from_dict(cls, doc: dict) -> "StateBase":
        pass

    def coordinate_index(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.coordinates())}

    def value_of(self, name: str) -> float:
        index = self.coordinate_index()
        if name not in index:
            raise ConfigError(f"Unknown coordinate '{name}' for state kind '{self.kind}'. "
                              f"Known coordinates: {self.coordinates()}")
        return float(self.to_vector()[index[name]])

    def check_finite(self):
        x = self.to_vector()
        if not np.all(np.isfinite(x)):
            bad = [n for n, v in zip(self.coordinates(), x) if not np.isfinite(v)]
            raise DomainError(f"{self.kind} state has non-finite coordinates: {bad}")


def state_from_dict(doc: dict) -> StateBase:
    """
    Build any registered state from its JSON document. The "kind" field picks the class.
    """
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("State document must be a JSON object with a 'kind' field")

    kind = doc["kind"]
    if kind not in STATE_KINDS:
        raise ConfigError(f"Unknown state kind '{kind}'. Known kinds: {sorted(STATE_KINDS)}")

    try:
        return STATE_KINDS[kind].from_dict(doc)
    except (KeyError, TypeError) as err:
        raise ConfigError(f"Malformed '{kind}' state document: {err}") from err


def state_to_dict(state: StateBase) -> dict:
    return state.to_dict()
