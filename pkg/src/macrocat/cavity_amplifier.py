"""Two-mode parametric amplification inside a lossy cavity.

Gain ``chi`` (Hamiltonian ``i chi (a^dag b^dag - a b)``) competes with loss
``lambda_`` (intensity transmission ``1 - 2 lambda dt`` per step).  Only the
products ``chi t`` and ``lambda t`` matter, so rates and times share one
arbitrary unit.

The normally ordered operator ``exp(kappa) exp(i(eta a^dag + mu b^dag))
exp(i(eta^* a + mu^* b))`` keeps its form under the dynamics, with

    d eta / dt = chi mu^* - lambda eta
    d mu  / dt = chi eta^* - lambda mu
    d kappa / dt = -2 chi Re(eta mu)

Its vacuum/coherent expectation value is the characteristic function of a
pair of quadratures, from which the joint Gaussian follows.  Measured
quadratures use ``x_theta = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidArgumentError, PreconditionError

__all__ = [
    "CavityParams",
    "JointQuadratureDistribution",
    "Regime",
    "ThresholdReport",
    "delta_variances",
    "propagate_scalars",
    "ode_integrate",
    "joint_distribution",
    "joint_probability",
    "threshold_report",
    "two_mode_sum_variance",
]

DEGENERACY_RTOL = 1e-6


@dataclass(frozen=True)
class CavityParams:
    chi: float
    lambda_: float
    t: float
    seed_alpha: complex = 0j
    seed_beta: complex = 0j
    theta: float = 0.0
    xi: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.chi) and self.chi > 0):
            raise InvalidArgumentError("chi must be positive")
        if not (math.isfinite(self.lambda_) and self.lambda_ >= 0):
            raise InvalidArgumentError("lambda_ must be nonnegative")
        if not (math.isfinite(self.t) and self.t >= 0):
            raise InvalidArgumentError("t must be nonnegative")


def _growth_integral(rate: float, t: float) -> float:
    """``(exp(2 rate t) - 1) / rate``, i.e. ``2 int_0^t exp(2 rate s) ds``.

    Near ``rate = 0`` the Taylor series in ``x = 2 rate t`` is used.
    """
    x = 2.0 * rate * t
    if abs(x) < 1e-4:
        return 2.0 * t * (1.0 + x / 2.0 + x * x / 6.0 + x**3 / 24.0)
    return math.expm1(x) / rate


def _decay_integral(rate: float, t: float) -> float:
    """``(1 - exp(-2 rate t)) / rate`` for ``rate > 0``."""
    return -math.expm1(-2.0 * rate * t) / rate


def _b_term(chi: float, lam: float, t: float) -> float:
    return _growth_integral(chi - lam, t)


def delta_variances(params: CavityParams) -> tuple[float, float]:
    """Squeezed and anti-squeezed principal variances ``(Delta_-, Delta_+)``.

    ``Delta_- = (lambda + chi e^{-2t(lambda+chi)}) / (2(lambda+chi))`` and
    ``Delta_+ = (lambda - chi e^{2t(chi-lambda)}) / (2(lambda-chi))``; at
    ``lambda = chi`` the latter tends to ``1/2 + chi t``.
    """
    chi, lam, t = params.chi, params.lambda_, params.t
    d_minus = 0.5 - 0.5 * chi * _decay_integral(chi + lam, t)
    d_plus = 0.5 + 0.5 * chi * _b_term(chi, lam, t)
    return d_minus, d_plus


def two_mode_sum_variance(params: CavityParams) -> float:
    """Variance of the squeezed two-mode sum ``X_a + X_b`` (vacuum value 1), ``2 Delta_-``.

    ``Delta_-`` refers to the unit-norm combination ``(x - y)/sqrt(2)``; the
    un-normalized sum used by the size bounds has twice that variance.
    """
    return 2.0 * delta_variances(params)[0]


def propagate_scalars(
    eta0: complex, mu0: complex, kappa0: float, params: CavityParams
) -> tuple[complex, complex, float]:
    """Closed-form evolution of ``(eta, mu, kappa)`` over time ``params.t``."""
    chi, lam, t = params.chi, params.lambda_, params.t
    damp = math.exp(-lam * t)
    ch, sh = math.cosh(chi * t), math.sinh(chi * t)
    eta0, mu0 = complex(eta0), complex(mu0)
    eta = damp * (ch * eta0 + sh * mu0.conjugate())
    mu = damp * (ch * mu0 + sh * eta0.conjugate())
    # int_0^t e^{-2 lam s} cosh(2 chi s) ds and the sinh analogue
    A = _decay_integral(chi + lam, t)
    B = _b_term(chi, lam, t)
    i_cosh = (B + A) / 4.0
    i_sinh = (B - A) / 4.0
    kappa = kappa0 - 2.0 * chi * ((eta0 * mu0).real * i_cosh + 0.5 * (abs(eta0) ** 2 + abs(mu0) ** 2) * i_sinh)
    return eta, mu, float(kappa)


def ode_integrate(
    eta0: complex, mu0: complex, kappa0: float, params: CavityParams, step: float
) -> tuple[complex, complex, float]:
    """Classical RK4 integration of the scalar system (independent of the closed form).

    ``step`` is shrunk to divide ``t`` evenly and must not exceed
    ``0.01 / max(chi, lambda)``.
    """
    chi, lam, t = params.chi, params.lambda_, params.t
    if not step > 0:
        raise InvalidArgumentError("step must be positive")
    if step > 0.01 / max(chi, lam) * (1 + 1e-12):
        raise PreconditionError(f"step {step} exceeds 0.01 / max(chi, lambda)")
    n = max(1, math.ceil(t / step - 1e-9)) if t > 0 else 0
    h = t / n if n else 0.0

    def rhs(e: complex, m: complex) -> tuple[complex, complex, float]:
        return chi * m.conjugate() - lam * e, chi * e.conjugate() - lam * m, -2.0 * chi * (e * m).real

    e, m, k = complex(eta0), complex(mu0), float(kappa0)
    for _ in range(n):
        e1, m1, k1 = rhs(e, m)
        e2, m2, k2 = rhs(e + 0.5 * h * e1, m + 0.5 * h * m1)
        e3, m3, k3 = rhs(e + 0.5 * h * e2, m + 0.5 * h * m2)
        e4, m4, k4 = rhs(e + h * e3, m + h * m3)
        e += h / 6.0 * (e1 + 2 * e2 + 2 * e3 + e4)
        m += h / 6.0 * (m1 + 2 * m2 + 2 * m3 + m4)
        k += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return e, m, k


@dataclass(frozen=True)
class JointQuadratureDistribution:
    """Bivariate Gaussian law of ``(x_theta^a, y_xi^b)``.

    ``delta_minus`` and ``delta_plus`` are the variances along ``(1, -1)`` and
    ``(1, 1)`` directions when ``theta + xi = 0``; for other angles the
    correlation is scaled by ``cos(theta + xi)``.
    """

    mean: np.ndarray
    cov: np.ndarray
    delta_minus: float
    delta_plus: float

    def principal_variances(self) -> tuple[float, float]:
        w = np.linalg.eigvalsh(self.cov)
        return float(w[0]), float(w[1])

    def pdf(self, x: np.ndarray | float, y: np.ndarray | float) -> np.ndarray | float:
        x = np.asarray(x, dtype=float) - self.mean[0]
        y = np.asarray(y, dtype=float) - self.mean[1]
        inv = np.linalg.inv(self.cov)
        q = inv[0, 0] * x * x + 2 * inv[0, 1] * x * y + inv[1, 1] * y * y
        out = np.exp(-0.5 * q) / (2 * math.pi * math.sqrt(np.linalg.det(self.cov)))
        return float(out) if out.ndim == 0 else out


def _means(params: CavityParams) -> np.ndarray:
    chi, lam, t = params.chi, params.lambda_, params.t
    damp = math.exp(-lam * t)
    ch, sh = math.cosh(chi * t), math.sinh(chi * t)
    a, b = complex(params.seed_alpha), complex(params.seed_beta)
    eth, exi = np.exp(1j * params.theta), np.exp(1j * params.xi)
    z = math.sqrt(2.0) * damp * (ch * (a / eth).real + sh * (b * eth).real)
    gam = math.sqrt(2.0) * damp * (ch * (b / exi).real + sh * (a * exi).real)
    return np.array([z, gam])


def joint_distribution(params: CavityParams) -> JointQuadratureDistribution:
    d_minus, d_plus = delta_variances(params)
    diag = 0.5 * (d_plus + d_minus)
    off = 0.5 * (d_plus - d_minus) * math.cos(params.theta + params.xi)
    cov = np.array([[diag, off], [off, diag]])
    return JointQuadratureDistribution(_means(params), cov, d_minus, d_plus)


def joint_probability(params: CavityParams, x: np.ndarray | float, y: np.ndarray | float):
    """Density of the joint quadrature outcome ``(x, y)``."""
    return joint_distribution(params).pdf(x, y)


class Regime(str, Enum):
    BELOW = "below"
    AT = "at"
    ABOVE = "above"


@dataclass(frozen=True)
class ThresholdReport:
    regime: Regime
    delta_minus_limit: float
    delta_plus_limit: float  # inf unless below threshold
    delta_plus_growth_rate: float  # exponent of e^{rate t} in Delta_+, 0 below threshold

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "delta_minus_limit": self.delta_minus_limit,
            "delta_plus_limit": self.delta_plus_limit,
            "delta_plus_growth_rate": self.delta_plus_growth_rate,
        }


def threshold_report(chi: float, lambda_: float) -> ThresholdReport:
    """Long-time (high-finesse) behaviour of the principal variances."""
    if not chi > 0 or lambda_ < 0:
        raise InvalidArgumentError("need chi > 0 and lambda_ >= 0")
    floor = lambda_ / (2.0 * (lambda_ + chi))
    if abs(lambda_ - chi) < DEGENERACY_RTOL * chi:
        return ThresholdReport(Regime.AT, floor, math.inf, 0.0)
    if lambda_ > chi:
        return ThresholdReport(Regime.BELOW, floor, lambda_ / (2.0 * (lambda_ - chi)), 0.0)
    return ThresholdReport(Regime.ABOVE, floor, math.inf, 2.0 * (chi - lambda_))
