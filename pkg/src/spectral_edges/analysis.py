"""Error-scale diagnostics, energy functionals, beta selection and Monte Carlo runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .concentration import QUAD_LOWER, TINY, ConcentrationFactor, _quad
from .detector import (ThresholdPolicy, conjugate_sum, default_grid, detect_edges,
                       predicted_scale)
from .spectral_core import TWO_PI, SignalSpec, add_white_noise, analytic_coefficients

VARIANTS = ("L2_regular", "BV_regular")


class NoInteriorMinimum(ValueError):
    """The objective is minimized at an end of the search bracket."""

    def __init__(self, message, beta):
        super().__init__(message)
        self.beta = beta


@dataclass(frozen=True)
class EpsilonDiagnostics:
    eps0: float
    eps1: float
    eps2: float
    eps3: float

    @property
    def eps_total(self) -> float:
        return self.eps0 + self.eps1 + self.eps2 + self.eps3


def epsilon_diagnostics(factor: ConcentrationFactor) -> EpsilonDiagnostics:
    """Discrete versions of the four small quantities controlling the error.

    eps0 = TV(s_k / xi_k) / N, eps1 = |s_N| / N,
    eps2 = sum_{k>=2} |s_k - s_{k-1}| / (N xi_k), eps3 = |s_1|.
    """
    N = factor.N
    if N < 2:
        raise ValueError("need at least two factor values")
    s = factor.values
    xi = factor.xi
    ratio = s / xi
    return EpsilonDiagnostics(
        eps0=float(np.sum(np.abs(np.diff(ratio)))) / N,
        eps1=abs(float(s[-1])) / N,
        eps2=float(np.sum(np.abs(np.diff(s)) / xi[1:])) / N,
        eps3=abs(float(s[0])),
    )


@dataclass(frozen=True)
class EnergyReport:
    E_J: float
    E_R: float
    E_eta: float
    E_eta_eff: float
    E_J_eff: float
    variant: str
    # lower limit used for E_R; the integrand is singular at 0 for sigma ~ xi
    E_R_lower: float = 0.0


def energy_report(factor: ConcentrationFactor, eta: float,
                  variant: str = "L2_regular") -> EnergyReport:
    """Jump, regular-part and noise energies of a factor.

    E_J = (1/N) int (sigma/xi)^2, E_eta = eta N int sigma^2 and
    E_R = (1/N^3) int sigma^2/xi^4 (L2) or (1/N) int |sigma|/xi^2 (BV).
    E_R is integrated from max(1/N, k0/N), matching the discrete sum that
    starts at k = 1.  Custom tables use the discrete sums directly.
    """
    if not (eta >= 0 and math.isfinite(eta)):
        raise ValueError("eta must be finite and nonnegative")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    N = factor.N
    lower = max(1.0, factor.k0) / N
    if factor.family == "custom_table":
        s = factor.values
        k = np.arange(1, N + 1)
        E_J = float(np.sum((s / k) ** 2))
        E_eta = eta * float(np.sum(s ** 2))
        if variant == "L2_regular":
            E_R = float(np.sum(s ** 2 / k ** 4.0))
        else:
            E_R = float(np.sum(np.abs(s) / k ** 2.0))
        lower = 1.0 / N
    else:
        sig = factor.sigma
        pts = factor.breakpoints()
        E_J = _quad(lambda t: (float(sig(max(t, TINY))) / max(t, TINY)) ** 2,
                    QUAD_LOWER, 1.0, pts) / N
        E_eta = eta * N * _quad(lambda t: float(sig(t)) ** 2, 0.0, 1.0, pts)
        if variant == "L2_regular":
            E_R = _quad(lambda t: float(sig(t)) ** 2 / t ** 4, lower, 1.0, pts) / N ** 3
        else:
            E_R = _quad(lambda t: abs(float(sig(t))) / t ** 2, lower, 1.0, pts) / N
    beta = factor.beta or 0.0
    return EnergyReport(E_J=E_J, E_R=E_R, E_eta=E_eta, E_eta_eff=2.0 * math.sqrt(E_eta),
                        E_J_eff=math.sqrt(eta) * beta, variant=variant, E_R_lower=lower)


def noise_energy(eta: float, beta: float, N: int) -> float:
    """E_eta of the noise-adapted factor in closed form.

    eta N int_0^1 sigma_eta^2 = (sqrt(eta)/beta) (atan A - A/(1+A^2)) / (2 atan(A)^2)
    with A = sqrt(eta) beta N; tends to sqrt(eta)/(pi beta) for A >> 1.
    """
    A = math.sqrt(eta) * beta * N
    at = math.atan(A)
    return math.sqrt(eta) / beta * 0.5 * (at - A / (1.0 + A * A)) / at ** 2


def beta_policy(eta: float) -> float:
    """beta = pi * eta^(-1/6)."""
    if not 0 < eta < 1:
        raise ValueError(f"eta must lie in (0, 1), got {eta!r}")
    return math.pi * eta ** (-1.0 / 6.0)


def beta_objective(eta: float, beta: float, N: int,
                   weights: tuple[float, float] = (1.0, 1.0)) -> float:
    """w_noise * 2 sqrt(E_eta) + w_jump * sqrt(eta) beta."""
    w_noise, w_jump = weights
    return w_noise * 2.0 * math.sqrt(noise_energy(eta, beta, N)) + w_jump * math.sqrt(eta) * beta


def optimize_beta(eta: float, bracket: tuple[float, float] = (0.1, 1000.0), N: int = 1000,
                  weights: tuple[float, float] = (1.0, 1.0), rtol: float = 1e-4) -> float:
    """Minimize the balanced effective error over beta in ``bracket``."""
    lo, hi = bracket
    if not 0 < lo < hi:
        raise ValueError("bracket must satisfy 0 < lo < hi")
    if not eta > 0:
        raise ValueError("eta must be positive")

    def g(log_beta):
        return beta_objective(eta, math.exp(log_beta), N, weights)

    xatol = 0.01 * rtol
    res = optimize.minimize_scalar(g, bounds=(math.log(lo), math.log(hi)), method="bounded",
                                   options={"xatol": xatol})
    best = float(res.x)
    grid = np.linspace(math.log(lo), math.log(hi), 100)
    values = np.array([g(t) for t in grid])
    i = int(np.argmin(values))
    if i in (0, grid.size - 1) and values[i] <= g(best):
        raise NoInteriorMinimum(
            f"objective decreases toward the bracket end beta={math.exp(grid[i]):.6g}",
            float(math.exp(grid[i])))
    if values[i] < g(best):
        # Bounded search fell into a local minimum; polish from the best grid point.
        lo_i, hi_i = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        res = optimize.minimize_scalar(g, bounds=(lo_i, hi_i), method="bounded",
                                       options={"xatol": xatol})
        best = float(res.x)
    if best - math.log(lo) < 10 * xatol or math.log(hi) - best < 10 * xatol:
        raise NoInteriorMinimum("minimizer sits on the bracket boundary", math.exp(best))
    return math.exp(best)


@dataclass
class TrialRow:
    trial: int
    seed: int
    amplitudes: list[float]
    plateau_rms: float
    plateau_max: float
    detected: list[bool]
    false_edges: int


@dataclass
class MonteCarloSummary:
    N: int
    eta: float
    epsilon: float
    jump_locations: list[float]
    jump_amplitudes: list[float]
    rows: list[TrialRow] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return len(self.rows)

    def _amps(self) -> np.ndarray:
        return np.array([r.amplitudes for r in self.rows], dtype=float).reshape(self.trials, -1)

    @property
    def amplitude_mean(self) -> np.ndarray:
        return self._amps().mean(axis=0)

    @property
    def amplitude_std(self) -> np.ndarray:
        return self._amps().std(axis=0)

    @property
    def plateau_rms(self) -> float:
        return math.sqrt(float(np.mean([r.plateau_rms ** 2 for r in self.rows])))

    @property
    def plateau_max(self) -> float:
        return max(r.plateau_max for r in self.rows)

    @property
    def detection_rate(self) -> float:
        """Fraction of trials in which every jump was found."""
        return float(np.mean([all(r.detected) for r in self.rows]))

    @property
    def false_edge_rate(self) -> float:
        return float(np.mean([r.false_edges for r in self.rows]))


def plateau_mask(grid: np.ndarray, locations, distance: float) -> np.ndarray:
    """Grid points farther than ``distance`` (periodically) from every jump."""
    mask = np.ones(grid.shape, dtype=bool)
    for z in locations:
        d = np.abs(grid - z) % TWO_PI
        mask &= np.minimum(d, TWO_PI - d) > distance
    return mask


def nearest_index(grid: np.ndarray, z: float) -> int:
    d = np.abs(grid - z) % TWO_PI
    return int(np.argmin(np.minimum(d, TWO_PI - d)))


def monte_carlo_scale(signal: SignalSpec, eta: float,
                      factor_builder: Callable[[int], ConcentrationFactor] | ConcentrationFactor,
                      trials: int, seed: int, N: int | None = None, grid=None,
                      policy: ThresholdPolicy | None = None, match_cells: float = 2.0,
                      plateau_factor: float = 10.0) -> MonteCarloSummary:
    """Repeat detection over independent noise draws (seed + trial).

    Records, per trial, the conjugate sum at the grid point nearest each
    jump, the RMS and maximum of |K f| on the plateau (farther than
    ``plateau_factor * eps`` from every jump), and whether an edge was
    reported within ``match_cells`` grid cells of each jump.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(factor_builder, ConcentrationFactor):
        factor = factor_builder
    else:
        if N is None:
            raise TypeError("N is required with a factor builder")
        factor = factor_builder(N)
    N = factor.N
    policy = policy or ThresholdPolicy()
    x = default_grid(N) if grid is None else np.asarray(grid, dtype=float)
    h = (x[-1] - x[0]) / (x.size - 1)
    eps = predicted_scale(factor.eta, factor.beta, N)
    locs = list(signal.locations)
    idx = [nearest_index(x, z) for z in locs]
    far = plateau_mask(x, locs, plateau_factor * eps)
    clean = analytic_coefficients(signal, N)

    summary = MonteCarloSummary(N=N, eta=eta, epsilon=eps, jump_locations=locs,
                                jump_amplitudes=list(signal.amplitudes),
                                params=dict(factor.params(), seed=seed, trials=trials,
                                            match_cells=match_cells,
                                            plateau_distance=plateau_factor * eps))
    for t in range(trials):
        data = add_white_noise(clean, eta, seed + t)
        K = conjugate_sum(data, factor, x)
        result = detect_edges(x, K, eps, policy, N=N)
        plateau = np.abs(K[far])
        found = [any(_cdist(e, z) <= match_cells * h * (1 + 1e-9) for e, _ in result.edges)
                 for z in locs]
        false = sum(1 for e, _ in result.edges
                    if all(_cdist(e, z) > match_cells * h * (1 + 1e-9) for z in locs))
        summary.rows.append(TrialRow(
            trial=t, seed=seed + t, amplitudes=[float(K[i]) for i in idx],
            plateau_rms=float(np.sqrt(np.mean(plateau ** 2))) if plateau.size else 0.0,
            plateau_max=float(plateau.max()) if plateau.size else 0.0,
            detected=found, false_edges=false))
    return summary


def _cdist(a, b):
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
