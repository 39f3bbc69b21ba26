from enum import Enum


class InitMode(str, Enum):
    POINTS = "points"
    GRID = "grid"
    RANDOM = "random"
    WEAK = "weak"


class SweepParameter(str, Enum):
    A = "a"
    LAMBDA = "lambda"
    ETA = "eta"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class Suite(str, Enum):
    PROBLEMS = "problems"
    NUMERICS = "numerics"
    PROX = "prox"
    ENVELOPE = "envelope-calculus"
    QUADRATIC = "quadratic-oracle"
    LYAPUNOV = "lyapunov"
    ALL = "all"
