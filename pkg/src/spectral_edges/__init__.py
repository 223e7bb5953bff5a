"""Recover jump locations and amplitudes from (noisy) Fourier coefficients."""

__version__ = "0.1.0"

from .analysis import (EnergyReport, EpsilonDiagnostics, MonteCarloSummary, beta_policy,
                       energy_report, epsilon_diagnostics, monte_carlo_scale, optimize_beta)
from .concentration import (ConcentrationFactor, classical_factor, custom_factor,
                            exact_normalization_integral, noise_adapted_factor,
                            regularized_factor, truncated_factor)
from .detector import (DetectionResult, ThresholdPolicy, conjugate_sum, default_grid, detect,
                       detect_edges, predicted_scale)
from .spectral_core import (SignalSpec, SpectralData, add_white_noise, analytic_coefficients,
                            partial_sum_eval, quadrature_coefficients)

__all__ = [
    "ConcentrationFactor", "DetectionResult", "EnergyReport", "EpsilonDiagnostics",
    "MonteCarloSummary", "SignalSpec", "SpectralData", "ThresholdPolicy",
    "add_white_noise", "analytic_coefficients", "beta_policy", "classical_factor",
    "conjugate_sum", "custom_factor", "default_grid", "detect", "detect_edges",
    "energy_report", "epsilon_diagnostics", "exact_normalization_integral",
    "monte_carlo_scale", "noise_adapted_factor", "optimize_beta", "partial_sum_eval",
    "predicted_scale", "quadrature_coefficients", "regularized_factor", "truncated_factor",
]
