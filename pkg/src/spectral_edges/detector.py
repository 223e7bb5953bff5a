"""Conjugate sums and edge extraction by separation of scales."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .concentration import ConcentrationFactor
from .spectral_core import (SYMMETRY_RTOL, TWO_PI, ConjugateSymmetryError, SpectralData,
                            exp_sum, wrap_angle)


@dataclass(frozen=True)
class ThresholdPolicy:
    """Edge threshold ``max(c_rel * peak, min(c_abs * eps, floor_cap * peak))``.

    ``floor_cap`` keeps the absolute floor from swallowing the largest
    response when ``eps`` is not small compared with the jumps.  Peaks
    closer than ``max(2h, pi/N, window_eps * eps)`` are merged.
    """

    c_abs: float = 5.0
    c_rel: float = 0.3
    floor_cap: float = 0.5
    window_eps: float = 0.0
    refine: bool = False

    def threshold(self, peak: float, epsilon: float) -> float:
        return max(self.c_rel * peak, min(self.c_abs * epsilon, self.floor_cap * peak))


@dataclass
class DetectionResult:
    grid: np.ndarray
    samples: np.ndarray
    edges: list[tuple[float, float]]
    epsilon_predicted: float
    threshold_used: float
    meta: dict = field(default_factory=dict)

    @property
    def locations(self) -> np.ndarray:
        return np.array([z for z, _ in self.edges])

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([a for _, a in self.edges])


def default_grid(N: int, size: int | None = None) -> np.ndarray:
    """Uniform grid -pi + 2 pi j / M, j = 1..M, with M = 8N by default."""
    M = 8 * N if size is None else int(size)
    if M < 1:
        raise ValueError("grid size must be positive")
    return -np.pi + TWO_PI * np.arange(1, M + 1) / M


def _grid_spacing(x: np.ndarray) -> float | None:
    """Spacing of a uniform grid, or None."""
    if x.size < 2:
        return None
    d = np.diff(x)
    h = (x[-1] - x[0]) / (x.size - 1)
    if h <= 0 or np.max(np.abs(d - h)) > 1e-6 * h:
        return None
    return h


def _spans_period(x: np.ndarray, h: float | None) -> bool:
    return h is not None and abs(x[-1] - x[0] + h - TWO_PI) < 1e-9


def _weights(data: SpectralData, factor: ConcentrationFactor) -> np.ndarray:
    """pi i sgn(k) sigma(|k|/N) c_k for k = -N..N."""
    s = np.concatenate([-factor.values[::-1], [0.0], factor.values])
    return np.pi * 1j * s * data.coeffs


def conjugate_sum(data: SpectralData, factor: ConcentrationFactor, grid,
                  form: str = "complex", method: str = "auto") -> np.ndarray:
    """K f(x) = pi i sum_{|k|<=N} sgn(k) sigma(|k|/N) c_k exp(i k x).

    ``form="real"`` evaluates the equivalent sine sum
    ``-2 pi sum_{k>=1} sigma_k Im(c_k exp(i k x))`` instead.  The complex
    form uses an FFT when the grid is uniform over a full period and
    ``method`` allows it.
    """
    if factor.N != data.N:
        raise ValueError(f"factor has N={factor.N} but data has N={data.N}")
    data.check_symmetric()
    x = np.atleast_1d(np.asarray(grid, dtype=float))
    if not np.all(np.isfinite(x)):
        raise ValueError("grid values must be finite")
    if form == "real":
        return _real_form(data, factor, x)
    if form != "complex":
        raise ValueError(f"unknown form {form!r}")

    w = _weights(data, factor)
    h = _grid_spacing(x)
    M = x.size
    if method == "fft" or (method == "auto" and _spans_period(x, h) and M >= 2 * data.N + 1):
        if not (_spans_period(x, h) and M >= 2 * data.N + 1):
            raise ValueError("fft evaluation needs a full-period uniform grid with M >= 2N+1")
        k = data.modes
        b = np.zeros(M, dtype=complex)
        np.add.at(b, k % M, w * np.exp(1j * k * x[0]))
        values = M * np.fft.ifft(b)
    elif method in ("auto", "direct"):
        values = exp_sum(x, data.modes, w)
    else:
        raise ValueError(f"unknown method {method!r}")

    scale = float(np.sum(np.abs(w)))
    if values.size and np.max(np.abs(values.imag)) > SYMMETRY_RTOL * max(scale, 1e-300):
        raise ConjugateSymmetryError("conjugate sum has a non-negligible imaginary part")
    return values.real


def _real_form(data, factor, x, chunk=2**22):
    c = data.positive
    k = np.arange(1, data.N + 1)
    a = factor.values * c.real
    b = factor.values * c.imag
    out = np.empty(x.size)
    step = max(1, chunk // data.N)
    for start in range(0, x.size, step):
        kx = np.outer(x[start:start + step], k)
        out[start:start + step] = np.sin(kx) @ a + np.cos(kx) @ b
    return -TWO_PI * out


def predicted_scale(eta: float, beta: float | None, N: int) -> float:
    """Small scale eps of the concentration property.

    log(N)/N while sqrt(eta) beta N < 1, otherwise
    sqrt(eta) beta |log(sqrt(eta) beta)|.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    a = math.sqrt(eta) * beta if (eta and beta) else 0.0
    if a * N < 1:
        return math.log(N) / N
    if a >= 1:
        raise ValueError(f"sqrt(eta)*beta = {a:.3g} >= 1: noise is not below the jump scale")
    return a * abs(math.log(a))


def _circular_distance(a, b, period):
    d = np.abs(np.asarray(a) - np.asarray(b))
    return np.minimum(d, period - d) if period else d


def detect_edges(grid, samples, epsilon_predicted: float,
                 policy: ThresholdPolicy | None = None, N: int | None = None) -> DetectionResult:
    """Pick out edges as isolated peaks of |K f| above the threshold.

    Candidates are local maxima of |samples| above the threshold.  Within a
    window ``max(2h, pi/N)`` (widened by ``policy.window_eps``) only the
    largest survives; its signed sample is the amplitude.
    """
    policy = policy or ThresholdPolicy()
    x = np.asarray(grid, dtype=float)
    s = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("empty grid")
    if s.shape != x.shape:
        raise ValueError("grid and samples differ in length")
    if not np.all(np.isfinite(s)):
        raise ValueError("samples must be finite")
    h = _grid_spacing(x)
    if h is None and x.size > 1:
        raise ValueError("grid must be uniform")
    h = h or TWO_PI
    periodic = _spans_period(x, h)
    period = TWO_PI if periodic else None

    mag = np.abs(s)
    peak = float(mag.max())
    threshold = policy.threshold(peak, epsilon_predicted)

    if periodic:
        left, right = np.roll(mag, 1), np.roll(mag, -1)
    else:
        left = np.concatenate([[-np.inf], mag[:-1]])
        right = np.concatenate([mag[1:], [-np.inf]])
    candidates = np.flatnonzero((mag > threshold) & (mag >= left) & (mag > right))

    window = max(2 * h, math.pi / N if N else 0.0, policy.window_eps * epsilon_predicted)
    kept: list[int] = []
    for i in candidates[np.argsort(-mag[candidates], kind="stable")]:
        if all(_circular_distance(x[i], x[j], period) > window for j in kept):
            kept.append(int(i))

    edges = []
    for i in kept:
        loc, amp = float(x[i]), float(s[i])
        if policy.refine:
            loc, amp = _parabolic(x, s, i, h, periodic)
        edges.append((wrap_angle(loc) if periodic else loc, amp))
    edges.sort()
    return DetectionResult(x, s, edges, float(epsilon_predicted), float(threshold))


def _parabolic(x, s, i, h, periodic):
    n = s.size
    if not periodic and (i == 0 or i == n - 1):
        return float(x[i]), float(s[i])
    y0, ym, yp = s[i], s[(i - 1) % n], s[(i + 1) % n]
    curv = ym - 2 * y0 + yp
    if curv == 0:
        return float(x[i]), float(y0)
    delta = 0.5 * (ym - yp) / curv
    return float(x[i] + delta * h), float(y0 - 0.25 * (ym - yp) * delta)


def detect(data: SpectralData, factor: ConcentrationFactor, grid=None,
           policy: ThresholdPolicy | None = None) -> DetectionResult:
    """Conjugate sum on ``grid`` (default 8N points) followed by edge extraction."""
    x = default_grid(data.N) if grid is None else np.asarray(grid, dtype=float)
    samples = conjugate_sum(data, factor, x)
    eps = predicted_scale(factor.eta, factor.beta, data.N)
    result = detect_edges(x, samples, eps, policy, N=data.N)
    result.meta.update(factor.params())
    return result
