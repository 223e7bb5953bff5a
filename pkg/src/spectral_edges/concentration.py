"""Concentration factors sigma(xi) on [0, 1] and their normalization.

Every factor is sampled at xi = k/N, k = 1..N, and is normalized so that

    int_0^1 sigma(xi) / xi dxi = 1.

Families
--------
classical_linear
    sigma(xi) = xi.
noise_adapted
    sigma(xi) = A xi / ((1 + A^2 xi^2) atan(A)),  A = sqrt(eta) beta N.
truncated_optimal
    sigma(xi) = C (N xi - k0)_+ / (1 + eta beta^2 N^2 xi^2) for xi <= N0/N,
    zero beyond.  C comes from the closed-form integral.
regularized_optimal
    The mollified-sign version of truncated_optimal (with N0 = N), which
    tends to it as the mollifier width goes to zero.
custom_table
    User-supplied samples, interpolated linearly in sigma(xi)/xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

FAMILIES = ("classical_linear", "noise_adapted", "truncated_optimal",
            "regularized_optimal", "custom_table")

NORMALIZATION_TOL = 1e-8
# sigma/xi is bounded at 0, so integrals start there; TINY replaces xi = 0
# if QUADPACK ever lands on it (subnormal breakpoints).
QUAD_LOWER = 0.0
TINY = float(np.finfo(float).tiny)


class NormalizationError(ArithmeticError):
    """A factor failed its normalization check."""


def _finite_positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be finite and positive, got {value!r}")


def _finite_nonnegative(name, value):
    if not (math.isfinite(value) and value >= 0):
        raise ValueError(f"{name} must be finite and nonnegative, got {value!r}")


def _quad(func, a, b, points=()):
    pts = sorted({p for p in points if a < p < b})
    value, _ = integrate.quad(func, a, b, points=pts or None, epsabs=1e-13,
                              epsrel=1e-13, limit=500)
    return value


@dataclass(frozen=True, eq=False)
class ConcentrationFactor:
    family: str
    N: int
    values: np.ndarray
    norm_constant: float
    eta: float = 0.0
    beta: float | None = None
    k0: float = 0.0
    N0: int | None = None
    epsilon_reg: float = 0.0
    # linear interpolant of sigma/xi for custom tables
    _ratio: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown factor family {self.family!r}")
        values = np.array(self.values, dtype=float)
        if values.shape != (self.N,):
            raise ValueError(f"expected {self.N} values, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("factor values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def xi(self) -> np.ndarray:
        return np.arange(1, self.N + 1) / self.N

    @property
    def sqrt_eta_beta(self) -> float:
        return math.sqrt(self.eta) * (self.beta or 0.0)

    def params(self) -> dict:
        """Parameters needed to rebuild the factor."""
        out = {"family": self.family, "N": self.N, "norm_constant": self.norm_constant}
        if self.family in ("noise_adapted", "truncated_optimal", "regularized_optimal"):
            out.update(eta=self.eta, beta=self.beta)
        if self.family in ("truncated_optimal", "regularized_optimal"):
            out.update(k0=self.k0, N0=self.N0)
        if self.family == "regularized_optimal":
            out.update(epsilon_reg=self.epsilon_reg)
        return out

    def sigma(self, xi) -> np.ndarray:
        """Closed-form sigma(xi) for the family (interpolant for tables)."""
        xi = np.asarray(xi, dtype=float)
        N = self.N
        if self.family == "classical_linear":
            return xi.copy()
        if self.family == "noise_adapted":
            A = self.sqrt_eta_beta * N
            return A * xi / ((1.0 + (A * xi) ** 2) * math.atan(A))
        if self.family == "truncated_optimal":
            denom = 1.0 + self.eta * self.beta ** 2 * (N * xi) ** 2
            out = self.norm_constant * np.maximum(N * xi - self.k0, 0.0) / denom
            return np.where(N * xi <= self.N0 * (1 + 1e-15), out, 0.0)
        if self.family == "regularized_optimal":
            return _mollified(N * xi, self.eta, self.beta, self.k0,
                              self.norm_constant, self.epsilon_reg)
        nodes = np.concatenate([[0.0], self.xi])
        return xi * np.interp(xi, nodes, self._ratio)

    def breakpoints(self) -> list[float]:
        pts = []
        if self.beta:
            A = self.sqrt_eta_beta * self.N
            pts += [1.0 / A, 10.0 / A]
        if self.family in ("truncated_optimal", "regularized_optimal"):
            pts += [self.k0 / self.N, (self.k0 + self.epsilon_reg) / self.N]
            if self.N0 is not None:
                pts.append(self.N0 / self.N)
        return [p for p in pts if 1e-12 < p < 1]

    def normalization_integral(self) -> float:
        """int_0^1 sigma(xi)/xi dxi by adaptive quadrature of the closed form."""
        if self.family == "custom_table":
            nodes = np.concatenate([[0.0], self.xi])
            return float(np.trapezoid(self._ratio, nodes))
        def ratio(t):
            t = max(t, TINY)
            return float(self.sigma(t)) / t
        return _quad(ratio, QUAD_LOWER, 1.0, self.breakpoints())

    def check_normalized(self, tol: float = NORMALIZATION_TOL) -> None:
        value = self.normalization_integral()
        if abs(value - 1.0) > tol:
            raise NormalizationError(
                f"{self.family}: int sigma/xi = {value!r}, off by {abs(value - 1):.2e}"
            )


def classical_factor(N: int) -> ConcentrationFactor:
    if N < 1:
        raise ValueError("N must be >= 1")
    return ConcentrationFactor("classical_linear", N, np.arange(1, N + 1) / N, 1.0)


def noise_adapted_factor(eta: float, beta: float, N: int) -> ConcentrationFactor:
    """sigma_eta(xi) = A xi / ((1 + A^2 xi^2) atan A), A = sqrt(eta) beta N.

    Depends on (eta, beta, N) only through A.  As A -> 0 it tends to the
    classical factor xi; for A >> 1 it peaks at xi = 1/A.
    """
    _finite_positive("eta", eta)
    _finite_positive("beta", beta)
    if N < 1:
        raise ValueError("N must be >= 1")
    A = math.sqrt(eta) * beta * N
    xi = np.arange(1, N + 1) / N
    values = (A / math.atan(A)) * xi / (1.0 + (A * xi) ** 2)
    factor = ConcentrationFactor("noise_adapted", N, values, 1.0 / math.atan(A),
                                 eta=eta, beta=beta)
    factor.check_normalized()
    return factor


def exact_normalization_integral(eta: float, beta: float, k0: float, N_eff: int,
                                 verify: bool = True) -> float:
    """Closed form of int_{k0/N}^1 (N xi - k0) / (xi (1 + eta beta^2 N^2 xi^2)) dxi.

    Equals k0 ln(k0/N) + (k0/2) ln((a^2 N^2 + 1)/(a^2 k0^2 + 1))
    + (atan(a N) - atan(a k0)) / a with a = sqrt(eta) beta.  With
    ``verify`` the value is cross-checked against adaptive quadrature.
    """
    _finite_positive("eta", eta)
    _finite_positive("beta", beta)
    _finite_nonnegative("k0", k0)
    if k0 >= N_eff:
        raise ValueError(f"k0 = {k0} must be below N_eff = {N_eff}")
    a = math.sqrt(eta) * beta
    A, B = a * N_eff, a * k0
    value = math.atan((A - B) / (1.0 + A * B)) / a
    if k0 > 0:
        # the two log terms combine to (k0/2) ln((B^2 + r^2) / (1 + B^2)), r = k0/N
        r = k0 / N_eff
        q = (B * B + r * r) / (1.0 + B * B)
        if q < 0.5:
            value += 0.5 * k0 * (2.0 * math.log(r) + math.log1p(A * A) - math.log1p(B * B))
        else:
            value += 0.5 * k0 * math.log1p((r - 1.0) * (r + 1.0) / (1.0 + B * B))
    if verify:
        check = normalization_integral_quadrature(eta, beta, k0, N_eff)
        if abs(check - value) > NORMALIZATION_TOL * abs(value):
            raise NormalizationError(
                f"closed form {value!r} disagrees with quadrature {check!r}"
            )
    return value


def normalization_integral_quadrature(eta: float, beta: float, k0: float, N_eff: int) -> float:
    """Adaptive-quadrature counterpart of exact_normalization_integral."""
    a2 = eta * beta * beta
    N = float(N_eff)

    if k0 == 0:
        # bounded integrand; integrate from 0 itself
        def integrand(xi):
            return N / (1.0 + a2 * N * N * xi * xi)
        lo = 0.0
    else:
        def integrand(xi):
            return (N * xi - k0) / (xi * (1.0 + a2 * N * N * xi * xi))
        lo = k0 / N
    A = math.sqrt(a2) * N
    return _quad(integrand, lo, 1.0, [1.0 / A, 10.0 / A, 100.0 / A, 2 * lo])


def approximate_norm_constant(eta: float, beta: float, k0: float, N: int,
                              variant: str = "atan") -> float:
    """Large-N approximations of C; diagnostics only, never applied.

    ``atan``:   1 / (k0 ln(aN) + atan(aN)/a)
    ``large_N``: 1 / (k0 ln(aN) + pi/(2a))
    with a = sqrt(eta) beta.  Pass N0 as ``N`` for the band-limited form.
    """
    a = math.sqrt(eta) * beta
    if variant == "atan":
        return 1.0 / (k0 * math.log(a * N) + math.atan(a * N) / a)
    if variant == "large_N":
        return 1.0 / (k0 * math.log(a * N) + math.pi / (2 * a))
    raise ValueError(f"unknown variant {variant!r}")


def truncated_factor(eta: float, beta: float, k0: float = 0.0, N0: int | None = None,
                     N: int | None = None) -> ConcentrationFactor:
    """Optimal factor C (k - k0)_+ / (1 + eta beta^2 k^2) on k0 < k <= N0."""
    if N is None:
        raise TypeError("N is required")
    if N0 is None:
        N0 = N
    if not 0 < N0 <= N:
        raise ValueError(f"need 0 < N0 <= N, got N0={N0}, N={N}")
    if not 0 <= k0 < N0:
        raise ValueError(f"need 0 <= k0 < N0, got k0={k0}, N0={N0}")
    C = 1.0 / exact_normalization_integral(eta, beta, k0, N0)
    k = np.arange(1, N + 1, dtype=float)
    values = C * np.maximum(k - k0, 0.0) / (1.0 + eta * beta ** 2 * k ** 2)
    values[k > N0] = 0.0
    factor = ConcentrationFactor("truncated_optimal", N, values, C, eta=eta, beta=beta,
                                 k0=float(k0), N0=int(N0))
    factor.check_normalized()
    return factor


def _mollified(n, eta, beta, k0, C, eps):
    """sigma_eps in the mode variable n = N xi."""
    n = np.asarray(n, dtype=float)
    denom = 1.0 + eta * beta ** 2 * n ** 2
    outer = C * (n - k0) / denom
    inner = C * eps * n / (eps * denom + C * k0)
    return np.where(n - k0 > eps, outer, inner)


def regularized_factor(eta: float, beta: float, k0: float, N: int,
                       epsilon_reg: float) -> ConcentrationFactor:
    """Mollified-sign optimal factor.

    Shares the normalization constant of ``truncated_factor(eta, beta, k0, N, N)``;
    its own integral differs from one by O(epsilon_reg).
    """
    _finite_positive("epsilon_reg", epsilon_reg)
    C = 1.0 / exact_normalization_integral(eta, beta, k0, N)
    k = np.arange(1, N + 1, dtype=float)
    values = _mollified(k, eta, beta, k0, C, epsilon_reg)
    return ConcentrationFactor("regularized_optimal", N, values, C, eta=eta, beta=beta,
                               k0=float(k0), N0=int(N), epsilon_reg=float(epsilon_reg))


def custom_factor(table, normalize: bool = True) -> ConcentrationFactor:
    """Factor from samples s_k = sigma(k/N), k = 1..N.

    sigma/xi is interpolated linearly between the nodes, held constant on
    [0, 1/N]; the normalization integral is then the trapezoid sum.
    """
    values = np.asarray(table, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("table must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(values)):
        raise ValueError("table entries must be finite")
    N = values.size
    xi = np.arange(1, N + 1) / N
    ratio = np.concatenate([[values[0] * N], values / xi])
    integral = float(np.trapezoid(ratio, np.concatenate([[0.0], xi])))
    if abs(integral) < 1e-12:
        raise NormalizationError("table has a vanishing normalization integral")
    C = 1.0 / integral if normalize else 1.0
    values = C * values
    ratio = np.concatenate([[values[0] * N], values / xi])
    return ConcentrationFactor("custom_table", N, values, C, _ratio=ratio)
