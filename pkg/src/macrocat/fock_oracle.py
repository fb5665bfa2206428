"""Brute-force truncated Fock-space oracle for one and two bosonic modes.

Everything here is deliberately naive: explicit amplitudes, explicit
(sparse) operator matrices, expectation values by matrix-vector products.
It exists to cross-check the closed forms in :mod:`macrocat.gaussian_core`
and :mod:`macrocat.macroscopicity`.

States are never renormalized silently.  Each :class:`FockVector` carries the
norm discarded by truncation (``tail``); callers pick cutoffs that keep it
below their tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln

from .errors import InvalidArgumentError, PreconditionError, TruncationError
from .gaussian_core import QuadratureObservable

__all__ = [
    "FockVector",
    "FockOperator",
    "annihilation",
    "creation",
    "number",
    "quadrature_operator",
    "observable",
    "tms_fock",
    "cat_state",
    "product_state",
    "pure_state_variance",
    "pure_state_qfi",
    "mean_vector",
    "covariance_matrix",
    "mean_photon_number",
    "hermite_functions",
    "position_wavefunction",
    "joint_x_distribution",
]


@dataclass(frozen=True, eq=False)
class FockVector:
    """Amplitudes over ``|n>`` (1-D) or ``|n_1, n_2>`` (2-D), ``n <= cutoff``.

    ``tail`` is an upper bound on the norm lost by truncation.
    """

    cutoff: int
    amplitudes: np.ndarray
    tail: float = 0.0

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim not in (1, 2) or any(d != self.cutoff + 1 for d in amps.shape):
            raise InvalidArgumentError(
                f"amplitude shape {amps.shape} inconsistent with cutoff {self.cutoff}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def flat(self) -> np.ndarray:
        """Amplitudes in the row-major ``kron`` ordering used by :func:`observable`."""
        return self.amplitudes.reshape(-1)

    def renormalized(self) -> "FockVector":
        return FockVector(self.cutoff, self.amplitudes / math.sqrt(self.norm_squared), 0.0)


@dataclass(frozen=True, eq=False)
class FockOperator:
    cutoff: int
    matrix: sp.csr_matrix
    label: str
    n_modes: int = 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def _check_cutoff(cutoff: int) -> int:
    if int(cutoff) != cutoff or cutoff < 1:
        raise InvalidArgumentError(f"cutoff must be a positive integer, got {cutoff!r}")
    return int(cutoff)


def _lowering(cutoff: int) -> sp.csr_matrix:
    n = np.arange(1, cutoff + 1)
    return sp.diags(np.sqrt(n).astype(complex), offsets=1, format="csr")


def annihilation(cutoff: int) -> FockOperator:
    cutoff = _check_cutoff(cutoff)
    return FockOperator(cutoff, _lowering(cutoff), "annihilation")


def creation(cutoff: int) -> FockOperator:
    cutoff = _check_cutoff(cutoff)
    return FockOperator(cutoff, _lowering(cutoff).T.tocsr(), "creation")


def number(cutoff: int) -> FockOperator:
    cutoff = _check_cutoff(cutoff)
    return FockOperator(cutoff, sp.diags(np.arange(cutoff + 1, dtype=complex), format="csr"), "number")


def _quadrature_matrix(cutoff: int, theta: float) -> sp.csr_matrix:
    a = _lowering(cutoff)
    return ((a * np.exp(1j * theta) + a.T * np.exp(-1j * theta)) / math.sqrt(2.0)).tocsr()


def quadrature_operator(cutoff: int, theta: float) -> FockOperator:
    """Single-mode ``X^theta = (a e^{i theta} + a^dag e^{-i theta}) / sqrt(2)``."""
    cutoff = _check_cutoff(cutoff)
    return FockOperator(cutoff, _quadrature_matrix(cutoff, theta), f"quadrature({theta:.6g})")


def _embed(op: sp.spmatrix, mode: int, n_modes: int, cutoff: int) -> sp.csr_matrix:
    eye = sp.identity(cutoff + 1, dtype=complex, format="csr")
    factors = [op if m == mode else eye for m in range(n_modes)]
    out = factors[0]
    for f in factors[1:]:
        out = sp.kron(out, f, format="csr")
    return out


def observable(obs: QuadratureObservable, cutoff: int, n_modes: int) -> FockOperator:
    """Matrix of a quadrature combination on the ``n_modes``-mode truncated space."""
    cutoff = _check_cutoff(cutoff)
    if obs.max_mode >= n_modes:
        raise InvalidArgumentError("observable acts on a mode outside the state")
    dim = (cutoff + 1) ** n_modes
    mat = sp.csr_matrix((dim, dim), dtype=complex)
    for mode, theta, weight in obs.terms:
        mat = mat + weight * _embed(_quadrature_matrix(cutoff, theta), mode, n_modes, cutoff)
    return FockOperator(cutoff, mat.tocsr(), "quadrature-sum", n_modes)


def tms_fock(g: float, cutoff: int, tol: float | None = None) -> FockVector:
    """``S(g)|00>`` truncated at ``cutoff`` photons per mode.

    Amplitudes are ``sech(g) (-tanh g)^k`` on ``|k, k>``, matching the sign
    convention of :func:`macrocat.gaussian_core.two_mode_squeezed_vacuum`.
    The reported tail is ``tanh(g)^(2(cutoff+1)) / (1 - tanh(g)^2)``.
    """
    cutoff = _check_cutoff(cutoff)
    if not math.isfinite(g):
        raise InvalidArgumentError("g must be finite")
    t = math.tanh(g)
    k = np.arange(cutoff + 1)
    diag = (-t) ** k / math.cosh(g)
    tail = t ** (2 * (cutoff + 1)) * math.cosh(g) ** 2
    if tol is not None and tail > tol:
        raise TruncationError(f"truncation tail {tail:.3e} exceeds tolerance {tol:.3e}")
    return FockVector(cutoff, np.diag(diag).astype(complex), tail)


def cat_state(alpha: complex, relative_sign: int, cutoff: int, tol: float | None = None) -> FockVector:
    """Normalized ``|alpha> + s|-alpha>`` for ``s = +1`` (even) or ``-1`` (odd)."""
    cutoff = _check_cutoff(cutoff)
    if relative_sign not in (1, -1):
        raise InvalidArgumentError("relative_sign must be +1 or -1")
    alpha = complex(alpha)
    r2 = abs(alpha) ** 2
    n = np.arange(cutoff + 1)
    parity = 1 + relative_sign * (-1.0) ** n
    if r2 == 0.0:
        amps = np.zeros(cutoff + 1, dtype=complex)
        amps[0 if relative_sign == 1 else 1] = 1.0
        return FockVector(cutoff, amps, 0.0)
    log_mag = n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    norm = 4.0 * (math.cosh(r2) if relative_sign == 1 else math.sinh(r2))
    amps = parity * np.exp(log_mag - 0.5 * math.log(norm)) * np.exp(1j * n * np.angle(alpha))
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    if tol is not None and tail > tol:
        raise TruncationError(f"truncation tail {tail:.3e} exceeds tolerance {tol:.3e}")
    return FockVector(cutoff, amps, tail)


def product_state(a: FockVector, b: FockVector) -> FockVector:
    """Two-mode product of two single-mode vectors with equal cutoff."""
    if a.n_modes != 1 or b.n_modes != 1 or a.cutoff != b.cutoff:
        raise InvalidArgumentError("need two single-mode vectors with the same cutoff")
    tail = a.tail + b.tail
    return FockVector(a.cutoff, np.outer(a.amplitudes, b.amplitudes), tail)


def _check_compatible(state: FockVector, op: FockOperator) -> None:
    if op.cutoff != state.cutoff or op.dim != state.dim:
        raise InvalidArgumentError(
            f"operator dimension {op.dim} does not match state dimension {state.dim}"
        )


def pure_state_variance(state: FockVector, obs: FockOperator) -> float:
    """``<O^2> - <O>^2`` for Hermitian ``O``; ``<O^2>`` is taken as ``||O psi||^2``."""
    _check_compatible(state, obs)
    psi = state.flat()
    o_psi = obs.matrix @ psi
    mean = np.vdot(psi, o_psi).real
    return float(np.vdot(o_psi, o_psi).real - mean**2)


def pure_state_qfi(state: FockVector, obs: FockOperator, norm_tol: float = 1e-8) -> float:
    """Quantum Fisher information of a pure state, ``4 Var(O)``."""
    if abs(state.norm_squared - 1.0) > max(norm_tol, state.tail):
        raise PreconditionError(f"state norm^2 = {state.norm_squared!r} is not 1")
    return 4.0 * pure_state_variance(state, obs)


def _phase_space_ops(state: FockVector) -> list[sp.csr_matrix]:
    # canonical (x, p) per mode; p = -X^{pi/2}
    ops = []
    for mode in range(state.n_modes):
        x = _embed(_quadrature_matrix(state.cutoff, 0.0), mode, state.n_modes, state.cutoff)
        p = -_embed(_quadrature_matrix(state.cutoff, math.pi / 2), mode, state.n_modes, state.cutoff)
        ops += [x, p]
    return ops


def mean_vector(state: FockVector) -> np.ndarray:
    """``(<x_1>, <p_1>, ...)`` in the interleaved ordering of gaussian_core."""
    psi = state.flat()
    return np.array([np.vdot(psi, op @ psi).real for op in _phase_space_ops(state)])


def covariance_matrix(state: FockVector) -> np.ndarray:
    """Symmetrized covariance ``Re<r_i r_j> - <r_i><r_j>``."""
    psi = state.flat()
    vecs = [op @ psi for op in _phase_space_ops(state)]
    mean = np.array([np.vdot(psi, v).real for v in vecs])
    second = np.array([[np.vdot(u, v).real for v in vecs] for u in vecs])
    return second - np.outer(mean, mean)


def mean_photon_number(state: FockVector) -> float:
    prob = np.abs(state.amplitudes) ** 2
    n = np.arange(state.cutoff + 1)
    if state.n_modes == 1:
        return float(prob @ n)
    return float(np.sum(prob * (n[:, None] + n[None, :])))


def hermite_functions(nmax: int, x: np.ndarray) -> np.ndarray:
    """Normalized oscillator eigenfunctions ``phi_n(x)`` for ``n = 0..nmax``.

    Uses the upward three-term recurrence on ``phi_n e^{x^2/2}`` with a running
    log scale, so large ``n`` or ``|x|`` neither overflow nor underflow early.
    Returns shape ``(nmax + 1, len(x))``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1, x.size))
    log_scale = np.zeros(x.size)
    prev = np.zeros(x.size)
    cur = np.ones(x.size)
    base = -0.5 * x**2 - 0.25 * math.log(math.pi)
    out[0] = np.exp(base)
    for n in range(nmax):
        nxt = math.sqrt(2.0 / (n + 1)) * x * cur - math.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e150
        if np.any(big):
            log_scale[big] += math.log(1e150)
            prev[big] /= 1e150
            cur[big] /= 1e150
        out[n + 1] = cur * np.exp(base + log_scale)
    return out


def _check_grid(state: FockVector, grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise InvalidArgumentError("grid must be a strictly increasing 1-D array")
    dx = float(np.max(np.diff(grid)))
    k_max = math.sqrt(2 * state.cutoff + 1)
    if math.pi / dx < k_max:
        raise InvalidArgumentError(
            f"grid spacing {dx:.3g} too coarse for cutoff {state.cutoff} "
            f"(Nyquist momentum {math.pi / dx:.3g} < {k_max:.3g})"
        )
    return grid


def position_wavefunction(state: FockVector, grid: np.ndarray) -> np.ndarray:
    """``<x|psi>`` (1-D) or ``<x_1, x_2|psi>`` on ``grid x grid`` (2-D)."""
    grid = _check_grid(state, grid)
    phi = hermite_functions(state.cutoff, grid)
    if state.n_modes == 1:
        return phi.T @ state.amplitudes
    return phi.T @ state.amplitudes @ phi


def joint_x_distribution(state: FockVector, grid: np.ndarray) -> np.ndarray:
    """Position-basis probability density ``|<x_1, x_2|psi>|^2`` on the grid."""
    return np.abs(position_wavefunction(state, grid)) ** 2
