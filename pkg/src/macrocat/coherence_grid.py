"""Two-mode position-basis states with a decoherence envelope.

A state is stored through the decomposition

    rho(x1, x2; x1', x2') = p(x1, x2) p*(x1', x2') f1(x1 - x1') f2(x2 - x2')

with ``p`` a normalized amplitude on an ``M x M`` grid and ``f1``, ``f2``
envelopes of the coherence distance (``f(0) = 1``, ``|f| <= 1``, even).  The
four-index kernel is never stored: every moment needed here reduces to
grid operations on ``p`` and scalar evaluations of ``f``.

Momentum is the canonical ``p = -i d/dx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError
from .macroscopicity import coherence_range

__all__ = [
    "GridSpec",
    "EnvelopeModel",
    "GridState",
    "MomentumMoments",
    "UnsupportedEnvelopeError",
    "gaussian_amplitude",
    "momentum_moments_ideal",
    "moments_from_decomposition",
    "moments_from_kernel",
    "momentum_moments_decohered",
    "decohered_momentum_distribution",
    "position_moments",
    "duan_simon_grid",
    "kernel_min_eigenvalue",
    "certified_coherence_width",
]


class UnsupportedEnvelopeError(InvalidArgumentError):
    """The envelope is not twice differentiable at zero coherence distance."""


@dataclass(frozen=True)
class GridSpec:
    """Square grid ``[-L, L]^2`` with ``points`` samples per axis (endpoints included)."""

    half_range: float
    points: int

    def __post_init__(self) -> None:
        if not self.half_range > 0:
            raise InvalidArgumentError("half_range must be positive")
        m = self.points
        if int(m) != m or m < 8 or m & (m - 1):
            raise InvalidArgumentError("points must be a power of two (>= 8)")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_range / (self.points - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_range, self.half_range, self.points)

    @property
    def momenta(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.points, self.spacing)

    @property
    def nyquist(self) -> float:
        return math.pi / self.spacing


@dataclass(frozen=True)
class EnvelopeModel:
    """Separable coherence envelope ``f1(d1) f2(d2)``.

    kinds: ``"unity"``; ``"gaussian"`` with widths ``gamma1``, ``gamma2``
    (``inf`` means no decay on that mode); ``"step"`` equal to 1 for
    ``|d| < epsilon`` and 0 otherwise, on both modes.
    """

    kind: str = "unity"
    gamma1: float = math.inf
    gamma2: float = math.inf
    epsilon: float = math.inf

    def __post_init__(self) -> None:
        if self.kind not in ("unity", "gaussian", "step"):
            raise InvalidArgumentError(f"unknown envelope kind {self.kind!r}")
        if self.kind == "gaussian" and not (self.gamma1 > 0 and self.gamma2 > 0):
            raise InvalidArgumentError("gaussian widths must be positive")
        if self.kind == "step" and not (0 < self.epsilon < math.inf):
            raise InvalidArgumentError("step half-width must be positive and finite")

    @classmethod
    def gaussian(cls, gamma1: float, gamma2: float) -> "EnvelopeModel":
        return cls("gaussian", gamma1=gamma1, gamma2=gamma2)

    @classmethod
    def step(cls, epsilon: float) -> "EnvelopeModel":
        return cls("step", epsilon=epsilon)

    @property
    def smooth(self) -> bool:
        return self.kind != "step"

    def factor(self, mode: int) -> Callable[[np.ndarray], np.ndarray]:
        if self.kind == "unity":
            return lambda d: np.ones_like(np.asarray(d, dtype=float))
        if self.kind == "step":
            eps = self.epsilon
            return lambda d: (np.abs(np.asarray(d, dtype=float)) < eps).astype(float)
        gamma = self.gamma1 if mode == 0 else self.gamma2
        if math.isinf(gamma):
            return lambda d: np.ones_like(np.asarray(d, dtype=float))
        return lambda d: np.exp(-np.asarray(d, dtype=float) ** 2 / (2.0 * gamma**2))

    def __call__(self, d1, d2):
        return self.factor(0)(d1) * self.factor(1)(d2)

    def second_derivatives_at_zero(self) -> tuple[float, float]:
        """``(f1''(0), f2''(0))``; raises for the non-smooth step envelope."""
        if self.kind == "step":
            raise UnsupportedEnvelopeError("step envelope has no second derivative at the jump")
        if self.kind == "unity":
            return 0.0, 0.0
        return tuple(0.0 if math.isinf(g) else -1.0 / g**2 for g in (self.gamma1, self.gamma2))

    def min_width(self) -> float:
        if self.kind == "step":
            return self.epsilon
        return min(self.gamma1, self.gamma2)


@dataclass(frozen=True, eq=False)
class GridState:
    spec: GridSpec
    amplitudes: np.ndarray
    envelope: EnvelopeModel = EnvelopeModel()

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        m = self.spec.points
        if amps.shape != (m, m):
            raise InvalidArgumentError(f"amplitudes must have shape {(m, m)}")
        norm = float(np.sum(np.abs(amps) ** 2)) * self.spec.spacing**2
        if abs(norm - 1.0) > 1e-10:
            raise InvalidArgumentError(f"amplitude norm {norm!r} differs from 1; use GridState.normalized")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, spec: GridSpec, amplitudes: np.ndarray, envelope: EnvelopeModel = EnvelopeModel()) -> "GridState":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = math.sqrt(float(np.sum(np.abs(amps) ** 2)) * spec.spacing**2)
        return cls(spec, amps / norm, envelope)

    def with_envelope(self, envelope: EnvelopeModel) -> "GridState":
        return GridState(self.spec, self.amplitudes, envelope)


def gaussian_amplitude(
    spec: GridSpec, position_cov: np.ndarray, momentum: tuple[float, float] = (0.0, 0.0)
) -> np.ndarray:
    """Normalized Gaussian amplitude whose ``|p|^2`` has covariance ``position_cov``.

    ``momentum`` adds a plane-wave phase, shifting ``<p_1>``, ``<p_2>``.
    """
    inv = np.linalg.inv(np.asarray(position_cov, dtype=float))
    x1, x2 = np.meshgrid(spec.axis, spec.axis, indexing="ij")
    q = inv[0, 0] * x1 * x1 + 2 * inv[0, 1] * x1 * x2 + inv[1, 1] * x2 * x2
    amp = np.exp(-q / 4.0 + 1j * (momentum[0] * x1 + momentum[1] * x2))
    return amp / math.sqrt(float(np.sum(np.abs(amp) ** 2)) * spec.spacing**2)


@dataclass(frozen=True)
class MomentumMoments:
    p1: float
    p2: float
    p1_sq: float
    p2_sq: float
    p1p2: float
    imag_residual: float = 0.0

    def var_sum(self, sign: float = 1.0) -> float:
        """``Var(p_1 + sign * p_2)``."""
        mean = self.p1 + sign * self.p2
        return self.p1_sq + self.p2_sq + 2.0 * sign * self.p1p2 - mean**2

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.p1, self.p1_sq, self.p2_sq, self.p1p2


def _nyquist_check(spec: GridSpec, scale: float) -> None:
    if spec.nyquist < 6.0 * scale:
        raise InvalidArgumentError(
            f"Nyquist momentum {spec.nyquist:.3g} below 6x the state's momentum scale {scale:.3g}"
        )


def momentum_moments_ideal(state: GridState) -> MomentumMoments:
    """Momentum moments of the pure state ``p`` (envelope ignored), by FFT."""
    spec = state.spec
    prob = np.abs(np.fft.fft2(state.amplitudes)) ** 2
    prob /= prob.sum()
    k = spec.momenta
    k1, k2 = k[:, None], k[None, :]
    m = MomentumMoments(
        float(np.sum(prob * k1)),
        float(np.sum(prob * k2)),
        float(np.sum(prob * k1**2)),
        float(np.sum(prob * k2**2)),
        float(np.sum(prob * k1 * k2)),
    )
    _nyquist_check(spec, math.sqrt(max(m.p1_sq, m.p2_sq)))
    return m


def moments_from_decomposition(state: GridState) -> MomentumMoments:
    """Moments from the pure-state part plus envelope curvature at zero distance.

    ``<p_i^2> = <p_i^2>_pure - f_i''(0)``; first moments and ``<p_1 p_2>``
    are unchanged because ``f_i'(0) = 0``.
    """
    d1, d2 = state.envelope.second_derivatives_at_zero()
    ideal = momentum_moments_ideal(state)
    return MomentumMoments(ideal.p1, ideal.p2, ideal.p1_sq - d1, ideal.p2_sq - d2, ideal.p1p2)


def _shift(spectrum: np.ndarray, k: np.ndarray, d1: float, d2: float) -> np.ndarray:
    """Fourier-interpolated ``psi(x1 + d1, x2 + d2)`` from ``fft2(psi)``."""
    phase = np.exp(1j * k[:, None] * d1) * np.exp(1j * k[None, :] * d2)
    return np.fft.ifft2(spectrum * phase)


def moments_from_kernel(state: GridState) -> MomentumMoments:
    """Moments straight from the density kernel.

    ``S(d) = int rho(c + d/2, c - d/2) dc`` is evaluated on a small stencil
    of coherence distances ``d`` (shifts by Fourier interpolation, envelope
    applied pointwise), then ``<p_1> = -i dS/dd_1``, ``<p_1^2> = -d^2S/dd_1^2``
    and ``<p_1 p_2> = -d^2S/dd_1 dd_2`` at ``d = 0`` by Richardson-extrapolated
    central differences.  Only the envelope inside the stencil is probed, so
    flat-topped envelopes such as the step are handled.
    """
    spec = state.spec
    env = state.envelope
    spectrum = np.fft.fft2(state.amplitudes)
    k = spec.momenta
    dA = spec.spacing**2
    width = env.min_width()
    h = min(0.01, width / 2.0) if env.kind == "step" else 0.01 * min(1.0, width)

    cache: dict[tuple[float, float], complex] = {}

    def S(d1: float, d2: float) -> complex:
        key = (d1, d2)
        if key not in cache:
            plus = _shift(spectrum, k, d1 / 2, d2 / 2)
            minus = _shift(spectrum, k, -d1 / 2, -d2 / 2)
            cache[key] = complex(np.sum(plus * np.conj(minus)) * dA * env(d1, d2))
        return cache[key]

    def derivs(step: float) -> tuple[complex, ...]:
        s0 = S(0.0, 0.0)
        first1 = (S(step, 0) - S(-step, 0)) / (2 * step)
        first2 = (S(0, step) - S(0, -step)) / (2 * step)
        second1 = (S(step, 0) - 2 * s0 + S(-step, 0)) / step**2
        second2 = (S(0, step) - 2 * s0 + S(0, -step)) / step**2
        mixed = (S(step, step) - S(step, -step) - S(-step, step) + S(-step, -step)) / (4 * step**2)
        return first1, first2, second1, second2, mixed

    coarse, fine = derivs(h), derivs(h / 2)
    first1, first2, second1, second2, mixed = ((4 * f - c) / 3 for f, c in zip(fine, coarse))
    norm = S(0.0, 0.0)
    vals = [-1j * first1 / norm, -1j * first2 / norm, -second1 / norm, -second2 / norm, -mixed / norm]
    residual = max(abs(v.imag) for v in vals)
    ideal_scale = math.sqrt(max(vals[2].real, vals[3].real, 0.0))
    _nyquist_check(spec, ideal_scale)
    return MomentumMoments(*(float(v.real) for v in vals), imag_residual=residual)


@dataclass(frozen=True)
class DecoheredMoments:
    formula: MomentumMoments | None
    direct: MomentumMoments


def momentum_moments_decohered(state: GridState) -> DecoheredMoments:
    """Both routes; ``formula`` is ``None`` for the step envelope."""
    formula = moments_from_decomposition(state) if state.envelope.smooth else None
    return DecoheredMoments(formula, moments_from_kernel(state))


def decohered_momentum_distribution(state: GridState) -> np.ndarray:
    """Full momentum distribution of the decohered state on the FFT momentum grid.

    Computed as the transform of ``autocorrelation(p) * f``; this is a valid
    probability distribution only for positive-definite envelopes (unity,
    gaussian), so the step envelope is rejected.
    """
    if not state.envelope.smooth:
        raise UnsupportedEnvelopeError("step envelope does not define a positive momentum law")
    spec = state.spec
    spectrum = np.fft.fft2(state.amplitudes)
    autocorr = np.fft.ifft2(np.abs(spectrum) ** 2)
    lag = spec.spacing * np.fft.fftfreq(spec.points, 1.0 / spec.points)
    weighted = autocorr * state.envelope(lag[:, None], lag[None, :])
    dist = np.fft.fft2(weighted).real
    return dist / dist.sum()


def position_moments(state: GridState) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of ``(x_1, x_2)`` under ``|p|^2``."""
    x = state.spec.axis
    prob = np.abs(state.amplitudes) ** 2
    prob = prob / prob.sum()
    m1 = float(np.sum(prob * x[:, None]))
    m2 = float(np.sum(prob * x[None, :]))
    d1 = x[:, None] - m1
    d2 = x[None, :] - m2
    cov = np.array(
        [
            [np.sum(prob * d1 * d1), np.sum(prob * d1 * d2)],
            [np.sum(prob * d1 * d2), np.sum(prob * d2 * d2)],
        ]
    )
    return np.array([m1, m2]), cov


def duan_simon_grid(state: GridState, moments: MomentumMoments, sign: float | None = None) -> float:
    """``Var(x_1 + s x_2) + Var(p_1 - s p_2)`` with ``s = +-1``.

    By default ``s`` is chosen against the sign of the position correlation.
    Envelopes leave the position statistics untouched.
    """
    _, cov = position_moments(state)
    if sign is None:
        sign = -1.0 if cov[0, 1] > 0 else 1.0
    var_x = cov[0, 0] + cov[1, 1] + 2 * sign * cov[0, 1]
    return float(var_x + moments.var_sum(-sign))


def kernel_min_eigenvalue(state: GridState, stride: int = 8) -> float:
    """Smallest eigenvalue of the subsampled kernel, relative to its largest."""
    idx = np.arange(0, state.spec.points, stride)
    x = state.spec.axis[idx]
    amps = state.amplitudes[np.ix_(idx, idx)].reshape(-1)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    x1, x2 = X1.reshape(-1), X2.reshape(-1)
    kern = np.outer(amps, np.conj(amps)) * state.envelope(x1[:, None] - x1[None, :], x2[:, None] - x2[None, :])
    w = np.linalg.eigvalsh(kern)
    return float(w[0] / w[-1])


def certified_coherence_width(v_minus_observed: float) -> float:
    """Lower bound ``1 / sqrt(V)`` on ``min(gamma_1, gamma_2)`` for Gaussian envelopes.

    Same number as :func:`macrocat.macroscopicity.coherence_range`.
    """
    return coherence_range(v_minus_observed)
