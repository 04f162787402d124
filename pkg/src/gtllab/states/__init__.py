from .toda import TodaState, FlaschkaState
from .gtl import GtlState, N3State, N3QState, PQState, CdwState
from .params import RepParams

__all__ = ["TodaState", "FlaschkaState", "GtlState", "N3State", "N3QState", "PQState", "CdwState",
           "RepParams"]
