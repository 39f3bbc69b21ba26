from enum import Enum


class RegimeTag(str, Enum):
    CONVERGED = "converged"
    CYCLE = "cycle"
    DIVERGED = "diverged"
    UNDETERMINED = "undetermined"
