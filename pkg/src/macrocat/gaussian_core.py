"""Gaussian states described by first and second quadrature moments.

Conventions used throughout the package:

* hbar = 1 and the rotated quadrature of mode ``i`` is
  ``X_i^theta = (a_i e^{i theta} + a_i^dag e^{-i theta}) / sqrt(2)``,
  which equals ``x_i cos(theta) - p_i sin(theta)`` with the canonical
  ``x = (a + a^dag)/sqrt(2)`` and ``p = (a - a^dag)/(i sqrt(2))``.
  The vacuum variance of every quadrature is 1/2.
* Phase-space vectors are interleaved, ``(x_1, p_1, ..., x_n, p_n)``.
* ``two_mode_squeezed_vacuum(g)`` is ``exp(g (a_1 a_2 - a_1^dag a_2^dag))``
  applied to the vacuum.  For ``g > 0`` the position quadratures are
  anti-correlated (``<x_1 x_2> = -sinh(2g)/2``) and the momenta correlated.
  Use :func:`tms_squeezed_observables` instead of hard-coding signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, PreconditionError

TWO_PI = 2.0 * math.pi

__all__ = [
    "GaussianState",
    "QuadratureObservable",
    "quadrature",
    "symplectic_form",
    "vacuum",
    "thermal",
    "coherent",
    "two_mode_squeezed_vacuum",
    "tms_squeezed_observables",
    "tms_antisqueezed_observables",
    "quadrature_mean",
    "quadrature_variance",
    "duan_simon_value",
    "apply_symplectic",
    "apply_loss",
    "apply_quadrature_noise",
    "random_pure_state",
    "spawn_rng",
    "sample_quadratures",
    "mean_photon_number",
]


def symplectic_form(n_modes: int) -> np.ndarray:
    """Standard symplectic form for interleaved ordering, ``[x_i, p_i] = i``."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean vector and covariance matrix of an n-mode Gaussian state.

    The covariance is symmetrized on construction.  Physical validity is not
    checked automatically; call :meth:`validate` where it matters.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.size == 0 or mean.size % 2:
            raise InvalidArgumentError(f"mean must have even, nonzero length; got {mean.size}")
        if cov.shape != (mean.size, mean.size):
            raise InvalidArgumentError(
                f"cov shape {cov.shape} does not match mean length {mean.size}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise InvalidArgumentError("mean and cov must be finite")
        cov = 0.5 * (cov + cov.T)
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def symplectic_eigenvalues(self) -> np.ndarray:
        """Symplectic spectrum, sorted ascending (each value appears once)."""
        omega = symplectic_form(self.n_modes)
        ev = np.abs(np.linalg.eigvals(1j * omega @ self.cov))
        return np.sort(ev)[::2]

    def is_valid(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.symplectic_eigenvalues() >= 0.5 - tol))

    def is_pure(self, tol: float = 1e-6) -> bool:
        return bool(np.all(np.abs(self.symplectic_eigenvalues() - 0.5) <= tol))

    def validate(self, tol: float = 1e-9) -> "GaussianState":
        """Raise :class:`PreconditionError` unless the uncertainty relation holds."""
        nu = self.symplectic_eigenvalues()
        if np.any(nu < 0.5 - tol):
            raise PreconditionError(
                f"covariance violates the uncertainty relation (min symplectic eigenvalue {nu.min():.3e})"
            )
        return self

    def block(self, mode: int) -> np.ndarray:
        """2x2 covariance block of a single mode."""
        _check_mode(mode, self.n_modes)
        return self.cov[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2]


def _check_mode(mode: int, n_modes: int) -> None:
    if not 0 <= mode < n_modes:
        raise InvalidArgumentError(f"mode index {mode} out of range for {n_modes} modes")


def _direction(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), -math.sin(theta)])


@dataclass(frozen=True)
class QuadratureObservable:
    """Linear combination ``sum_i w_i X_{m_i}^{theta_i}`` of rotated quadratures.

    ``terms`` holds ``(mode, theta, weight)`` triples.  Angles are reduced
    modulo 2 pi; weights must be finite and nonzero.
    """

    terms: tuple[tuple[int, float, float], ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.terms:
            raise InvalidArgumentError("an observable needs at least one term")
        clean = []
        for mode, theta, weight in self.terms:
            if int(mode) != mode or mode < 0:
                raise InvalidArgumentError(f"invalid mode index {mode!r}")
            if not math.isfinite(theta):
                raise InvalidArgumentError("quadrature angle must be finite")
            if not math.isfinite(weight) or weight == 0.0:
                raise InvalidArgumentError("weights must be finite and nonzero")
            clean.append((int(mode), float(theta) % TWO_PI, float(weight)))
        object.__setattr__(self, "terms", tuple(clean))

    def vector(self, n_modes: int) -> np.ndarray:
        """Coefficient vector ``v`` such that the observable equals ``v . r``."""
        v = np.zeros(2 * n_modes)
        for mode, theta, weight in self.terms:
            _check_mode(mode, n_modes)
            v[2 * mode : 2 * mode + 2] += weight * _direction(theta)
        return v

    @property
    def max_mode(self) -> int:
        return max(t[0] for t in self.terms)

    def __add__(self, other: "QuadratureObservable") -> "QuadratureObservable":
        return QuadratureObservable(self.terms + other.terms)

    def __neg__(self) -> "QuadratureObservable":
        return QuadratureObservable(tuple((m, t, -w) for m, t, w in self.terms))

    def __sub__(self, other: "QuadratureObservable") -> "QuadratureObservable":
        return self + (-other)

    def __rmul__(self, scalar: float) -> "QuadratureObservable":
        return QuadratureObservable(tuple((m, t, scalar * w) for m, t, w in self.terms))


def quadrature(mode: int, theta: float, weight: float = 1.0) -> QuadratureObservable:
    """Single rotated quadrature ``weight * X_mode^theta``."""
    return QuadratureObservable(((mode, theta, weight),))


def vacuum(n_modes: int) -> GaussianState:
    if int(n_modes) != n_modes or n_modes < 1:
        raise InvalidArgumentError(f"n_modes must be a positive integer, got {n_modes!r}")
    n = int(n_modes)
    return GaussianState(np.zeros(2 * n), 0.5 * np.eye(2 * n))


def thermal(nbar: Sequence[float] | float, n_modes: int | None = None) -> GaussianState:
    """Product of thermal states with mean occupations ``nbar``."""
    nb = np.atleast_1d(np.asarray(nbar, dtype=float))
    if n_modes is not None:
        nb = np.broadcast_to(nb, (n_modes,))
    if np.any(nb < 0):
        raise InvalidArgumentError("thermal occupation must be nonnegative")
    return GaussianState(np.zeros(2 * nb.size), np.diag(np.repeat(nb + 0.5, 2)))


def coherent(alpha: complex) -> GaussianState:
    """Single-mode coherent state; ``<x> = sqrt(2) Re(alpha)``, ``<p> = sqrt(2) Im(alpha)``."""
    alpha = complex(alpha)
    return GaussianState(math.sqrt(2.0) * np.array([alpha.real, alpha.imag]), 0.5 * np.eye(2))


def two_mode_squeezed_vacuum(g: float) -> GaussianState:
    """Two-mode squeezed vacuum with squeezing parameter ``g``.

    Quadrature variances are ``cosh(2g)/2``; ``<x_1 x_2> = -sinh(2g)/2`` and
    ``<p_1 p_2> = +sinh(2g)/2``.  The normal-ordered form with amplitudes
    ``+tanh(g)^k`` on ``|k, k>`` is the same family at ``-g``.
    """
    if not math.isfinite(g):
        raise InvalidArgumentError("g must be finite")
    c = math.cosh(2.0 * g) / 2.0
    s = math.sinh(2.0 * g) / 2.0
    cov = np.array(
        [
            [c, 0.0, -s, 0.0],
            [0.0, c, 0.0, s],
            [-s, 0.0, c, 0.0],
            [0.0, s, 0.0, c],
        ]
    )
    return GaussianState(np.zeros(4), cov)


def tms_squeezed_observables(g: float) -> tuple[QuadratureObservable, QuadratureObservable]:
    """The (position-type, momentum-type) sums whose variance is ``exp(-2|g|)``.

    For ``g >= 0`` these are ``X_1^0 + X_2^0`` and ``X_1^{pi/2} - X_2^{pi/2}``;
    the relative signs flip for ``g < 0``.
    """
    s = 1.0 if g >= 0 else -1.0
    half_pi = math.pi / 2
    return (
        quadrature(0, 0.0) + quadrature(1, 0.0, s),
        quadrature(0, half_pi) + quadrature(1, half_pi, -s),
    )


def tms_antisqueezed_observables(g: float) -> tuple[QuadratureObservable, QuadratureObservable]:
    """Conjugate partners of :func:`tms_squeezed_observables`, variance ``exp(2|g|)``."""
    s = 1.0 if g >= 0 else -1.0
    half_pi = math.pi / 2
    return (
        quadrature(0, 0.0) + quadrature(1, 0.0, -s),
        quadrature(0, half_pi) + quadrature(1, half_pi, s),
    )


def quadrature_mean(state: GaussianState, obs: QuadratureObservable) -> float:
    return float(obs.vector(state.n_modes) @ state.mean)


def quadrature_variance(state: GaussianState, obs: QuadratureObservable) -> float:
    v = obs.vector(state.n_modes)
    return float(v @ state.cov @ v)


def duan_simon_value(
    state: GaussianState,
    a: float,
    phi: float,
    phi_prime: float,
    Phi: float,
    Phi_prime: float,
) -> float:
    """``V(|a| X_1^phi + X_2^Phi / a) + V(|a| X_1^phi' - X_2^Phi' / a)``.

    Separable states give at least 2 when ``phi - phi' = Phi - Phi' = pi/2``.
    """
    if a == 0 or not math.isfinite(a):
        raise InvalidArgumentError("a must be finite and nonzero")
    first = quadrature(0, phi, abs(a)) + quadrature(1, Phi, 1.0 / a)
    second = quadrature(0, phi_prime, abs(a)) + quadrature(1, Phi_prime, -1.0 / a)
    return quadrature_variance(state, first) + quadrature_variance(state, second)


def apply_symplectic(state: GaussianState, S: np.ndarray) -> GaussianState:
    S = np.asarray(S, dtype=float)
    return GaussianState(S @ state.mean, S @ state.cov @ S.T)


def apply_loss(state: GaussianState, transmissions: Sequence[float] | float) -> GaussianState:
    """Pure-loss channel with per-mode transmission ``eta``.

    ``mean -> sqrt(eta) mean`` and ``cov -> eta cov + (1 - eta)/2 I`` mode-wise.
    """
    eta = np.broadcast_to(np.asarray(transmissions, dtype=float), (state.n_modes,))
    if np.any(~np.isfinite(eta)) or np.any(eta < 0) or np.any(eta > 1):
        raise InvalidArgumentError("transmissions must lie in [0, 1]")
    k = np.repeat(np.sqrt(eta), 2)
    cov = k[:, None] * state.cov * k[None, :] + np.diag(np.repeat((1.0 - eta) / 2.0, 2))
    return GaussianState(k * state.mean, cov)


def apply_quadrature_noise(
    state: GaussianState, mode: int, theta: float, variance: float
) -> GaussianState:
    """Random kicks ``exp(i lam X_mode^theta)`` with zero-mean ``lam`` of the given variance.

    The kick displaces the quadrature conjugate to ``X^theta``; for
    ``theta = 0`` the momentum variance grows by ``variance``.
    """
    if not math.isfinite(variance) or variance < 0:
        raise InvalidArgumentError("noise variance must be finite and nonnegative")
    _check_mode(mode, state.n_modes)
    gen = quadrature(mode, theta).vector(state.n_modes)
    shift = symplectic_form(state.n_modes) @ gen
    return GaussianState(state.mean, state.cov + variance * np.outer(shift, shift))


def _random_orthogonal_symplectic(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    u = q * (np.diag(r) / np.abs(np.diag(r)))
    # xxpp block form, then reorder to interleaved.
    block = np.block([[u.real, -u.imag], [u.imag, u.real]])
    perm = np.ravel(np.column_stack([np.arange(n), np.arange(n) + n]))
    return block[np.ix_(perm, perm)]


def random_pure_state(
    n_modes: int, rng: np.random.Generator, max_squeezing: float = 1.0, max_displacement: float = 1.0
) -> GaussianState:
    """Random pure Gaussian state built as ``O_1 . squeeze . O_2`` acting on vacuum."""
    o1 = _random_orthogonal_symplectic(n_modes, rng)
    o2 = _random_orthogonal_symplectic(n_modes, rng)
    r = rng.uniform(0.0, max_squeezing, size=n_modes)
    sq = np.diag(np.ravel(np.column_stack([np.exp(-r), np.exp(r)])))
    S = o1 @ sq @ o2
    mean = rng.uniform(-max_displacement, max_displacement, size=2 * n_modes)
    return GaussianState(mean, 0.5 * S @ S.T)


def spawn_rng(seed: int, stream: int | None = None) -> np.random.Generator:
    """Generator for ``(seed, stream)``.

    Work split across workers uses ``stream = 0, 1, ...``; each stream is the
    child ``SeedSequence(seed, spawn_key=(stream,))``, so results do not depend
    on how many streams run concurrently.
    """
    entropy = int(seed) & (2**64 - 1)
    key = () if stream is None else (int(stream),)
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=key))


def sample_quadratures(
    state: GaussianState,
    angles: Sequence[float],
    count: int,
    seed: int,
    stream: int | None = None,
) -> np.ndarray:
    """Draw ``count`` joint outcomes of ``X_i^{angles[i]}``, one per mode.

    Returns an array of shape ``(count, n_modes)``.
    """
    if int(count) != count or count < 1:
        raise InvalidArgumentError("count must be a positive integer")
    angles = list(angles)
    if len(angles) != state.n_modes:
        raise InvalidArgumentError("need one angle per mode")
    V = np.array([quadrature(i, th).vector(state.n_modes) for i, th in enumerate(angles)])
    mu = V @ state.mean
    sigma = V @ state.cov @ V.T
    w, U = np.linalg.eigh(sigma)
    if w.min() < -1e-12 * max(1.0, w.max()):
        raise PreconditionError("marginal covariance is not positive semidefinite")
    factor = U * np.sqrt(np.clip(w, 0.0, None))
    z = spawn_rng(seed, stream).standard_normal((int(count), state.n_modes))
    return mu + z @ factor.T


def mean_photon_number(state: GaussianState) -> float:
    return float((np.trace(state.cov) + state.mean @ state.mean - state.n_modes) / 2.0)

