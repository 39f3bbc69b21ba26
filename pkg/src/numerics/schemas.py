import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from src.exceptions import EvaluationError


class SymMatrix(BaseModel):
    """Dense symmetric matrix. Entries are symmetrized on construction once
    they pass the relative symmetry check."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray

    @field_validator("entries", mode="before")
    @classmethod
    def check_symmetric(cls, value):
        M = np.asarray(value, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise EvaluationError("matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
        if np.max(np.abs(M - M.T), initial=0.0) > 1e-12 * scale:
            raise ValueError("matrix is not symmetric within 1e-12 relative")
        return 0.5 * (M + M.T)

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def of(cls, M) -> "SymMatrix":
        if isinstance(M, SymMatrix):
            return M
        return cls(entries=M)
