"""Delta-shell decay model. Times are reduced (m = a = hbar = 1) unless noted."""

from ._core import (
    ConvergenceError,
    DataError,
    DomainError,
    Error,
    __version__,
    characteristic_time,
    find_poles,
    fit_exponential,
    fit_powerlaw,
    lambda_scan,
    regime_report,
    scale_mapping,
    survival_series,
    synthetic_experiment,
    wavefunction,
    weight_table,
)

__all__ = [
    "ConvergenceError",
    "DataError",
    "DomainError",
    "Error",
    "__version__",
    "characteristic_time",
    "find_poles",
    "fit_exponential",
    "fit_powerlaw",
    "lambda_scan",
    "regime_report",
    "scale_mapping",
    "survival_series",
    "synthetic_experiment",
    "wavefunction",
    "weight_table",
]
