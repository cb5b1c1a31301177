"""Error reports between a reference matrix and an estimate."""

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .linalg import as_matrix, frobenius_norm, spectral_norm, two_inf_norm

__all__ = ["ErrorReport", "error_report"]


@dataclass(frozen=True)
class ErrorReport:
    """Uniform and average errors of an estimate against a reference."""

    uniform_error: float      # max row l2 distance
    average_error: float      # mean squared row distance
    frobenius_error: float
    spectral_error: float
    per_row_errors: np.ndarray  # (n,) row l2 distances

    def to_dict(self) -> dict:
        return {
            "uniform_error": self.uniform_error,
            "average_error": self.average_error,
            "frobenius_error": self.frobenius_error,
            "spectral_error": self.spectral_error,
            "per_row_errors": self.per_row_errors.tolist(),
        }


def error_report(reference, estimate) -> ErrorReport:
    ref = as_matrix(reference, "reference")
    est = as_matrix(estimate, "estimate")
    if ref.shape != est.shape:
        raise DataError(f"shape mismatch: {ref.shape} vs {est.shape}")
    diff = est - ref
    rows = np.sqrt((diff * diff).sum(axis=1))
    return ErrorReport(
        uniform_error=two_inf_norm(diff),
        average_error=float((rows * rows).mean()),
        frobenius_error=frobenius_norm(diff),
        spectral_error=spectral_norm(diff),
        per_row_errors=rows,
    )
