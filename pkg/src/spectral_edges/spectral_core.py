"""Test signals, their Fourier coefficients, and spectral white noise.

Signals are 2*pi-periodic on the cell (-pi, pi].  A signal is a sum of
unit sawtooth ramps (one per jump) plus a smooth part given directly by
its Fourier coefficients, so the exact coefficients are always available
in closed form:

    c_k = sum_j a_j exp(-i k z_j) / (2 pi i k) + s_k,      k != 0

The canonical ramp with a unit jump at 0 is ``(pi - x) / (2 pi)`` on
``(0, 2 pi)``, which has mean zero and ``c_k = 1 / (2 pi i k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi
# Relative tolerance for the imaginary residue of sums of conjugate-symmetric data.
SYMMETRY_RTOL = 1e-10


class ConjugateSymmetryError(ValueError):
    """Coefficients do not describe a real-valued signal."""


def wrap_angle(x):
    """Map angles onto the period cell (-pi, pi]."""
    y = np.pi - np.mod(np.pi - np.asarray(x, dtype=float), TWO_PI)
    if np.ndim(y) == 0:
        return float(y)
    return y


def cos_term(k: int, amplitude: float = 1.0) -> dict[int, complex]:
    """Fourier coefficients of ``amplitude * cos(k x)``."""
    if k == 0:
        return {0: complex(amplitude)}
    return {k: complex(amplitude / 2), -k: complex(amplitude / 2)}


def sin_term(k: int, amplitude: float = 1.0) -> dict[int, complex]:
    """Fourier coefficients of ``amplitude * sin(k x)``."""
    if k == 0:
        return {}
    return {k: complex(0.0, -amplitude / 2), -k: complex(0.0, amplitude / 2)}


def merge_coefficients(*parts: Mapping[int, complex]) -> dict[int, complex]:
    out: dict[int, complex] = {}
    for part in parts:
        for k, c in part.items():
            out[int(k)] = out.get(int(k), 0j) + complex(c)
    return {k: c for k, c in out.items() if c != 0}


@dataclass(frozen=True)
class SignalSpec:
    """Piecewise-smooth periodic test signal.

    Parameters
    ----------
    jumps : sequence of (location, amplitude)
        Jump locations in radians and amplitudes ``f(z+) - f(z-)``.
    smooth : mapping k -> complex
        Fourier coefficients of the smooth part.  Must be conjugate
        symmetric, i.e. describe a real function.
    """

    jumps: tuple[tuple[float, float], ...] = ()
    smooth: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        jumps = tuple(sorted((wrap_angle(z), float(a)) for z, a in self.jumps))
        for z, a in jumps:
            if not (math.isfinite(z) and math.isfinite(a)):
                raise ValueError("jump locations and amplitudes must be finite")
            if a == 0.0:
                raise ValueError(f"jump at {z!r} has zero amplitude")
        locs = [z for z, _ in jumps]
        if len(set(locs)) != len(locs):
            raise ValueError("jump locations must be pairwise distinct")
        smooth = {int(k): complex(c) for k, c in dict(self.smooth).items()}
        for k, c in smooth.items():
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError(f"smooth coefficient {k} is not finite")
            partner = smooth.get(-k, 0j)
            if abs(partner - c.conjugate()) > 1e-14 * max(1.0, abs(c)):
                raise ConjugateSymmetryError(
                    f"smooth coefficients at k={k} and k={-k} are not conjugate"
                )
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "smooth", smooth)

    @classmethod
    def sawtooth(cls, location: float = 0.0, amplitude: float = 1.0) -> "SignalSpec":
        return cls(jumps=((location, amplitude),))

    @property
    def locations(self) -> np.ndarray:
        return np.array([z for z, _ in self.jumps], dtype=float)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([a for _, a in self.jumps], dtype=float)

    def shifted(self, delta: float) -> "SignalSpec":
        """Translate the whole signal by ``delta``: g(x) = f(x - delta)."""
        smooth = {k: c * np.exp(-1j * k * delta) for k, c in self.smooth.items()}
        return SignalSpec(((z + delta, a) for z, a in self.jumps), smooth)

    def __add__(self, other: "SignalSpec") -> "SignalSpec":
        amps: dict[float, float] = {}
        for z, a in self.jumps + other.jumps:
            amps[z] = amps.get(z, 0.0) + a
        jumps = tuple((z, a) for z, a in amps.items() if a != 0.0)
        return SignalSpec(jumps, merge_coefficients(self.smooth, other.smooth))

    def __call__(self, x) -> np.ndarray:
        """Point values; at a jump the mean of the one-sided limits."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for z, a in self.jumps:
            y = np.mod(x - z, TWO_PI)
            ramp = (np.pi - y) / TWO_PI
            out += a * np.where(y == 0.0, 0.0, ramp)
        for k, c in self.smooth.items():
            out += (c * np.exp(1j * k * x)).real
        return out


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Fourier coefficients c_k for k = -N..N (stored at index k + N)."""

    N: int
    coeffs: np.ndarray
    noise_variance: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be a positive integer")
        coeffs = np.array(self.coeffs, dtype=complex)
        if coeffs.shape != (2 * self.N + 1,):
            raise ValueError(f"expected {2 * self.N + 1} coefficients, got {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def positive(self) -> np.ndarray:
        """c_1 .. c_N."""
        return self.coeffs[self.N + 1:]

    def __getitem__(self, k: int) -> complex:
        if abs(k) > self.N:
            raise IndexError(k)
        return complex(self.coeffs[k + self.N])

    def symmetry_defect(self) -> float:
        """max_k |c_{-k} - conj(c_k)|."""
        return float(np.max(np.abs(self.coeffs[::-1] - self.coeffs.conj())))

    def is_conjugate_symmetric(self, rtol: float = SYMMETRY_RTOL) -> bool:
        scale = max(float(np.sum(np.abs(self.coeffs))), np.finfo(float).tiny)
        return self.symmetry_defect() <= rtol * scale

    def check_symmetric(self, rtol: float = SYMMETRY_RTOL) -> None:
        if not self.is_conjugate_symmetric(rtol):
            raise ConjugateSymmetryError(
                f"coefficients violate c(-k) = conj(c(k)): defect {self.symmetry_defect():.3e}"
            )

    def __add__(self, other: "SpectralData") -> "SpectralData":
        if other.N != self.N:
            raise ValueError("cannot add spectral data with different N")
        return SpectralData(self.N, self.coeffs + other.coeffs)

    def scaled(self, factor: float) -> "SpectralData":
        return SpectralData(self.N, factor * self.coeffs, self.noise_variance, self.seed)


def jump_coefficients(jumps: Sequence[tuple[float, float]], modes: np.ndarray) -> np.ndarray:
    k = np.asarray(modes)
    out = np.zeros(k.shape, dtype=complex)
    nz = k != 0
    for z, a in jumps:
        out[nz] += a * np.exp(-1j * k[nz] * z) / (2j * np.pi * k[nz])
    return out


def analytic_coefficients(signal: SignalSpec, N: int) -> SpectralData:
    """Exact Fourier coefficients of ``signal`` for |k| <= N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    k = np.arange(-N, N + 1)
    coeffs = jump_coefficients(signal.jumps, k)
    for m, c in signal.smooth.items():
        if abs(m) <= N:
            coeffs[m + N] += c
    # Enforce exact symmetry; the two halves can differ in the last bit.
    coeffs = 0.5 * (coeffs + coeffs[::-1].conj())
    return SpectralData(N, coeffs)


def quadrature_coefficients(signal: SignalSpec, N: int, M: int | None = None) -> SpectralData:
    """Coefficients from midpoint-rule sampling of the defining integral.

    Samples sit at ``-pi + (m + 1/2) 2pi/M``.  Exact for band-limited smooth
    parts of degree below ``M - N``; jump parts converge like ``1/M``.
    """
    if M is None:
        M = max(8 * N, 1024)
    if M < 2 * N + 1:
        raise ValueError(f"M={M} aliases: need M >= 2N+1 = {2 * N + 1}")
    h = TWO_PI / M
    x = -np.pi + (np.arange(M) + 0.5) * h
    spectrum = np.fft.fft(signal(x)) / M
    k = np.arange(-N, N + 1)
    coeffs = spectrum[k % M] * np.exp(1j * k * (np.pi - 0.5 * h))
    return SpectralData(N, coeffs)


def noise_coefficients(N: int, eta: float, seed: int) -> np.ndarray:
    """Complex Gaussian white noise with E|n_k|^2 = eta, conjugate symmetric.

    Uses the counter-based Philox generator so a (seed, N) pair always
    yields the same draw.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    scale = math.sqrt(eta / 2.0)
    pos = scale * (rng.standard_normal(N) + 1j * rng.standard_normal(N))
    n0 = math.sqrt(eta) * rng.standard_normal()
    return np.concatenate([pos[::-1].conj(), [n0], pos])


def add_white_noise(data: SpectralData, eta: float, seed: int) -> SpectralData:
    if not (eta >= 0.0 and math.isfinite(eta)):
        raise ValueError("eta must be a finite nonnegative number")
    if eta == 0.0:
        return SpectralData(data.N, data.coeffs, 0.0, seed)
    return SpectralData(data.N, data.coeffs + noise_coefficients(data.N, eta, seed), eta, seed)


def exp_sum(x: np.ndarray, modes: np.ndarray, weights: np.ndarray, chunk: int = 2**22) -> np.ndarray:
    """sum_k w_k exp(i k x) at each x, in blocks of at most ``chunk`` matrix entries."""
    out = np.empty(x.shape, dtype=complex)
    step = max(1, chunk // max(1, modes.size))
    for start in range(0, x.size, step):
        block = x[start:start + step]
        out[start:start + step] = np.exp(1j * np.outer(block, modes)) @ weights
    return out


def partial_sum_eval(data: SpectralData, grid) -> np.ndarray:
    """Evaluate S_N f(x) = sum_{|k|<=N} c_k exp(i k x) at each grid point."""
    x = np.atleast_1d(np.asarray(grid, dtype=float))
    if not np.all(np.isfinite(x)):
        raise ValueError("grid values must be finite")
    data.check_symmetric()
    values = exp_sum(x, data.modes, data.coeffs)
    bound = SYMMETRY_RTOL * float(np.sum(np.abs(data.coeffs)))
    if values.size and np.max(np.abs(values.imag)) > max(bound, 1e-300):
        raise ConjugateSymmetryError("partial sum has a non-negligible imaginary part")
    return values.real
