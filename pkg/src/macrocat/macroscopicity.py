"""Effective-size measures for multimode continuous-variable states.

The effective size of an n-mode state is ``max_theta F(X_theta) / (4 n)``
where ``X_theta = sum_i X_i^{theta_i}`` and ``F`` is the quantum Fisher
information.  For pure states ``F = 4 Var``, so the size is the largest
variance of a sum of local quadratures divided by the number of modes.
For mixed states only a measurable lower bound is offered, built from the
variance of the conjugate sum.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidArgumentError, PreconditionError
from .gaussian_core import GaussianState

__all__ = [
    "Convention",
    "EffectiveSizeReport",
    "ExperimentRecord",
    "max_quadrature_sum_variance",
    "n_eff_pure_gaussian",
    "n_eff_cat",
    "n_eff_cat_from_definition",
    "n_eff_kitten_product",
    "n_eff_lower_bound",
    "lower_bound_report",
    "coherence_range",
    "cap_quadrature_noise",
    "cap_loss",
    "cap_phase_noise",
    "cat_photon_number",
    "cat_alpha_sq_for_size",
    "equivalent_cat_photon_number",
    "certified_size",
]


class Convention(str, Enum):
    """Normalization of the variance lower bound.

    ``AS_PRINTED`` reads the bound as ``1 / V``; ``DERIVATION_CONSISTENT``
    follows ``V(A) F(B) >= <i[A, B]>^2 = 4`` with ``n = 2`` modes, giving
    ``1 / (2 V)``, which is tight on the two-mode squeezed vacuum.
    """

    AS_PRINTED = "as-printed"
    DERIVATION_CONSISTENT = "derivation-consistent"


@dataclass(frozen=True)
class EffectiveSizeReport:
    n_eff: float
    kind: str  # "exact-pure" | "lower-bound"
    n_modes: int
    convention: str | None = None
    optimal_angles: tuple[float, ...] = ()
    bounds: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["optimal_angles"] = list(self.optimal_angles)
        return d


@dataclass(frozen=True)
class ExperimentRecord:
    """One published squeezing experiment.

    ``v_minus`` is the measured variance of the squeezed conjugate sum, in
    units where a single vacuum quadrature has variance 1/2 (so the two-mode
    vacuum gives 1).
    """

    label: str
    year: int
    v_minus: float
    mean_photon_number: float | None = None
    source_note: str = ""

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v_minus) and self.v_minus > 0):
            raise InvalidArgumentError(f"v_minus must be positive, got {self.v_minus!r}")
        if self.mean_photon_number is not None and not self.mean_photon_number >= 0:
            raise InvalidArgumentError("mean_photon_number must be nonnegative")


def _argmax_trig(c1: float, s1: float, c2: float, s2: float) -> float:
    """Global maximizer of ``c1 cos t + s1 sin t + c2 cos 2t + s2 sin 2t``.

    Critical points are the unit-circle roots of a quartic in ``z = e^{it}``.
    """

    def f(t: np.ndarray) -> np.ndarray:
        return c1 * np.cos(t) + s1 * np.sin(t) + c2 * np.cos(2 * t) + s2 * np.sin(2 * t)

    coeffs = np.array([s2 + 1j * c2, (s1 + 1j * c1) / 2, 0.0, (s1 - 1j * c1) / 2, s2 - 1j * c2])
    scale = np.max(np.abs(coeffs))
    if scale == 0.0:
        return 0.0
    roots = np.roots(coeffs / scale)
    cand = np.concatenate([np.angle(roots), [0.0, math.pi / 2, math.pi, -math.pi / 2]])
    for _ in range(3):
        d1 = -c1 * np.sin(cand) + s1 * np.cos(cand) - 2 * c2 * np.sin(2 * cand) + 2 * s2 * np.cos(2 * cand)
        d2 = -c1 * np.cos(cand) - s1 * np.sin(cand) - 4 * c2 * np.cos(2 * cand) - 4 * s2 * np.sin(2 * cand)
        ok = d2 < 0
        cand = np.where(ok, cand - d1 / np.where(ok, d2, 1.0), cand)
    return float(cand[np.argmax(f(cand))])


def _sum_variance(cov: np.ndarray, angles: np.ndarray) -> float:
    u = np.ravel(np.column_stack([np.cos(angles), -np.sin(angles)]))
    return float(u @ cov @ u)


def _coordinate_ascent(cov: np.ndarray, angles: np.ndarray, max_sweeps: int = 5000) -> np.ndarray:
    n = angles.size
    angles = angles.copy()
    best = _sum_variance(cov, angles)
    for _ in range(max_sweeps):
        for i in range(n):
            b = np.zeros(2)
            for j in range(n):
                if j != i:
                    uj = np.array([math.cos(angles[j]), -math.sin(angles[j])])
                    b += cov[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] @ uj
            A = cov[2 * i : 2 * i + 2, 2 * i : 2 * i + 2]
            angles[i] = _argmax_trig(2 * b[0], -2 * b[1], (A[0, 0] - A[1, 1]) / 2, -A[0, 1])
        value = _sum_variance(cov, angles)
        if value - best <= 1e-15 * max(1.0, abs(value)):
            best = max(best, value)
            break
        best = value
    return angles


def max_quadrature_sum_variance(state: GaussianState, starts: int = 8) -> tuple[float, tuple[float, ...]]:
    """``max_theta Var(sum_i X_i^{theta_i})`` and a maximizing angle vector.

    One mode: largest eigenvalue of the covariance block.  Two modes: the
    first angle is scanned on a 64-point grid with the second one solved
    exactly, then the best candidates are refined by coordinate ascent.
    More modes: ``starts`` coordinate-ascent runs (one seeded from the
    per-mode principal axes, the rest from fixed pseudo-random angles).
    """
    cov = state.cov
    n = state.n_modes
    if n == 1:
        w, U = np.linalg.eigh(cov)
        u = U[:, -1]
        return float(w[-1]), (float(math.atan2(-u[1], u[0]) % (2 * math.pi)),)

    if n == 2:
        inits = []
        for t1 in np.linspace(0.0, 2 * math.pi, 64, endpoint=False):
            u1 = np.array([math.cos(t1), -math.sin(t1)])
            b = cov[2:4, 0:2] @ u1
            A = cov[2:4, 2:4]
            t2 = _argmax_trig(2 * b[0], -2 * b[1], (A[0, 0] - A[1, 1]) / 2, -A[0, 1])
            inits.append(np.array([t1, t2]))
        inits.sort(key=lambda a: -_sum_variance(cov, a))
        inits = inits[:4]
    else:
        principal = []
        for i in range(n):
            w, U = np.linalg.eigh(cov[2 * i : 2 * i + 2, 2 * i : 2 * i + 2])
            principal.append(math.atan2(-U[1, -1], U[0, -1]))
        rng = np.random.default_rng(20150601)
        inits = [np.array(principal)] + [rng.uniform(0, 2 * math.pi, n) for _ in range(starts - 1)]

    best_val, best_angles = -math.inf, None
    for init in inits:
        angles = _coordinate_ascent(cov, init)
        val = _sum_variance(cov, angles)
        if val > best_val:
            best_val, best_angles = val, angles
    return best_val, tuple(float(a % (2 * math.pi)) for a in best_angles)


def n_eff_pure_gaussian(state: GaussianState, purity_tol: float = 1e-6) -> EffectiveSizeReport:
    """Exact effective size of a pure Gaussian state."""
    if not state.is_pure(purity_tol):
        raise PreconditionError(
            "state is mixed; its Fisher information is not 4 x variance. Use n_eff_lower_bound."
        )
    value, angles = max_quadrature_sum_variance(state)
    return EffectiveSizeReport(value / state.n_modes, "exact-pure", state.n_modes, None, angles)


def n_eff_cat(alpha_sq: float) -> float:
    """Closed form ``2|alpha|^2 / (1 + exp(-2|alpha|^2))`` for even cats (or products of them).

    Equals the quadrature variance in excess of the vacuum value 1/2; see
    :func:`n_eff_cat_from_definition`.
    """
    if not alpha_sq >= 0:
        raise InvalidArgumentError("alpha_sq must be nonnegative")
    return 2.0 * alpha_sq / (1.0 + math.exp(-2.0 * alpha_sq))


def n_eff_cat_from_definition(alpha_sq: float) -> float:
    """``Var(X^0)`` of the even cat, i.e. the Fisher-information definition applied
    directly.  Exceeds :func:`n_eff_cat` by the vacuum contribution 1/2."""
    return 0.5 + n_eff_cat(alpha_sq)


def n_eff_kitten_product(alpha_sq: float, n: int) -> float:
    """Size of ``n`` identical even cats; the ``1/n`` normalization makes it n-independent."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError("n must be a positive integer")
    return n_eff_cat(alpha_sq)


def _check_variance(v: float) -> None:
    if not (math.isfinite(v) and v > 0):
        raise InvalidArgumentError(f"variance must be positive and finite, got {v!r}")


def n_eff_lower_bound(v_minus: float, convention: Convention | str = Convention.AS_PRINTED) -> float:
    """Lower bound on the size from the squeezed conjugate-sum variance ``v_minus``."""
    _check_variance(v_minus)
    convention = Convention(convention)
    if convention is Convention.AS_PRINTED:
        return 1.0 / v_minus
    return 1.0 / (2.0 * v_minus)


def lower_bound_report(v_minus: float, n_modes: int = 2) -> EffectiveSizeReport:
    bounds = {c.value: n_eff_lower_bound(v_minus, c) for c in Convention}
    return EffectiveSizeReport(
        bounds[Convention.AS_PRINTED.value],
        "lower-bound",
        n_modes,
        Convention.AS_PRINTED.value,
        (),
        bounds,
    )


def coherence_range(v_minus: float) -> float:
    """Range ``1 / sqrt(v_minus)`` over which x-correlations are certified coherent."""
    _check_variance(v_minus)
    return 1.0 / math.sqrt(v_minus)


def cap_quadrature_noise(dh1: float, dh2: float) -> float:
    """Largest certifiable size under random quadrature kicks, ``1 / (dh1 + dh2)``.

    Returns ``inf`` when both noise variances vanish.
    """
    if dh1 < 0 or dh2 < 0:
        raise InvalidArgumentError("noise variances must be nonnegative")
    total = dh1 + dh2
    return math.inf if total == 0 else 1.0 / total


def cap_loss(eta: float) -> float:
    """Largest certifiable size behind loss with transmission ``eta``, ``1 / (1 - eta)``."""
    if not 0.0 <= eta <= 1.0:
        raise InvalidArgumentError("eta must lie in [0, 1]")
    if eta == 1.0:
        return math.inf
    # exact rational arithmetic on the shortest decimal form, so 0.9 gives 10 rather than 10.000000000000002
    return float(1 / (1 - Fraction(repr(float(eta)))))


def cap_phase_noise(dphi_sq: float, g: float) -> float:
    """Phase-noise cap ``1 / (dphi^2 (2 sinh^2 g + 1))`` for the two-mode squeezed vacuum."""
    if not dphi_sq > 0:
        raise InvalidArgumentError("phase-noise variance must be positive")
    return 1.0 / (dphi_sq * (2.0 * math.sinh(g) ** 2 + 1.0))


def cat_photon_number(alpha_sq: float) -> float:
    return alpha_sq * math.tanh(alpha_sq)


def cat_alpha_sq_for_size(n_eff: float, tol: float = 1e-13) -> float:
    """``|alpha|^2`` with ``n_eff_cat(|alpha|^2) = n_eff``, by bisection on ``[n_eff/2, n_eff]``."""
    if not (math.isfinite(n_eff) and n_eff > 0):
        raise InvalidArgumentError("n_eff must be positive and finite")
    lo, hi = n_eff / 2.0, n_eff
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if n_eff_cat(mid) < n_eff:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def equivalent_cat_photon_number(n_eff: float) -> float:
    """Mean photon number of the smallest even cat whose size reaches ``n_eff``."""
    return cat_photon_number(cat_alpha_sq_for_size(n_eff))


def certified_size(sigma_max_value: float, x_c: float) -> float:
    """The size one may actually claim: correlation range capped by coherence range."""
    if not (sigma_max_value > 0 and x_c > 0):
        raise InvalidArgumentError("both ranges must be positive")
    return min(sigma_max_value, x_c)
