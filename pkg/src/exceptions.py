from typing import Any, Optional

from fastapi import status


class SaddleError(Exception):
    """Base error. Carries a human readable detail plus the CLI exit code
    and HTTP status the surfaces map it to."""

    exit_code: int = 2
    status_code: int = status.HTTP_422_UNPROCESSABLE_CONTENT

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ParameterError(SaddleError):
    exit_code = 1
    status_code = status.HTTP_400_BAD_REQUEST


class ConfigError(SaddleError):
    exit_code = 1
    status_code = status.HTTP_400_BAD_REQUEST


class EvaluationError(SaddleError):
    pass


class NumericalSingularityError(SaddleError):
    pass


class ConsistencyError(SaddleError):
    pass


class ConvergenceFailure(SaddleError):
    def __init__(self, detail: str, best: Optional[Any] = None, residual: float = float("nan")):
        super().__init__(detail)
        self.best = best
        self.residual = residual


class InvariantFailure(SaddleError):
    exit_code = 3
    status_code = status.HTTP_409_CONFLICT
