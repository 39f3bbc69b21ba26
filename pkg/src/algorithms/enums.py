from enum import Enum


class Scheme(str, Enum):
    PPM = "ppm"
    PPM2 = "ppm2"
    GDA = "gda"
    GDA2 = "gda2"
    AGDA = "agda"
    EGM = "egm"


class Termination(str, Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    BUDGET = "budget"
    FAILED = "failed"
