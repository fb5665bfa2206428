"""Coarse-grained sign-guessing game.

Alice measures a quadrature of her mode exactly and keeps only its sign.
Bob measures the matching quadrature of his mode through a detector that
adds zero-mean Gaussian noise of standard deviation ``sigma`` and guesses
Alice's sign from the sign of his own outcome.  The largest ``sigma`` for
which Bob still wins with a prescribed probability measures how coarse a
detector suffices to tell the two branches apart.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidArgumentError, OutOfRangeError
from .gaussian_core import sample_quadratures, spawn_rng, two_mode_squeezed_vacuum

log = logging.getLogger(__name__)

CHUNK = 1 << 20

__all__ = [
    "GameParams",
    "GameResult",
    "p_guess_tms",
    "p_guess_cat",
    "sigma_max_tms",
    "sigma_max_tms_printed",
    "sigma_max_cat",
    "sigma_max_cat_binning",
    "inverse_erf",
    "simulate_tms_game",
    "simulate_cat_game",
    "simulate",
]


@dataclass(frozen=True)
class GameParams:
    """``kind`` is ``"tms"`` (uses ``g``) or ``"cat"`` (uses ``alpha``)."""

    kind: str
    sigma: float
    samples: int
    seed: int = 0xC0FFEE
    g: float = 0.0
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("tms", "cat"):
            raise InvalidArgumentError(f"unknown state kind {self.kind!r}")
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise InvalidArgumentError("detector sigma must be finite and nonnegative")
        if int(self.samples) != self.samples or self.samples < 1:
            raise InvalidArgumentError("samples must be a positive integer")
        if not (math.isfinite(self.g) and math.isfinite(self.alpha)):
            raise InvalidArgumentError("state parameter must be finite")


@dataclass(frozen=True)
class GameResult:
    p_guess_empirical: float
    standard_error: float
    samples_used: int
    wins: int

    @classmethod
    def from_counts(cls, wins: int, n: int) -> "GameResult":
        p = wins / n
        return cls(p, math.sqrt(p * (1.0 - p) / n), n, wins)

    def to_dict(self) -> dict:
        return asdict(self)


def p_guess_tms(g: float, sigma: float) -> float:
    """Winning probability with the two-mode squeezed vacuum.

    ``1/2 + arctan(|sinh 2g| / sqrt(1 + 2 sigma^2 cosh 2g)) / pi``.  Bob reads
    the sign through the known correlation, so the sign of ``g`` is irrelevant.
    """
    if sigma < 0 or not math.isfinite(sigma):
        raise InvalidArgumentError("sigma must be finite and nonnegative")
    s = abs(math.sinh(2.0 * g))
    return 0.5 + math.atan(s / math.sqrt(1.0 + 2.0 * sigma**2 * math.cosh(2.0 * g))) / math.pi


def sigma_max_tms(p_target: float, g: float) -> float:
    """Largest detector noise for which :func:`p_guess_tms` still equals ``p_target``.

    Algebraic inverse:
    ``sigma^2 = (sinh^2(2g) cot^2(pi (p - 1/2)) - 1) / (2 cosh 2g)``.
    """
    if not 0.5 < p_target < 1.0:
        raise OutOfRangeError("p_target must lie in (1/2, 1)")
    p0 = p_guess_tms(g, 0.0)
    if p_target > p0:
        raise OutOfRangeError(f"p_target={p_target} exceeds the noiseless value {p0:.12g}")
    cot = 1.0 / math.tan(math.pi * (p_target - 0.5))
    radicand = (math.sinh(2.0 * g) ** 2 * cot**2 - 1.0) / (2.0 * math.cosh(2.0 * g))
    return math.sqrt(max(radicand, 0.0))


def sigma_max_tms_printed(p_target: float, g: float) -> float:
    """The closed form as printed alongside the guessing formula, kept for comparison.

    ``sqrt((-1 + N (1/2 + N) cot^2(1/2 - P)) / (2 + 2N))`` with ``N = 2 sinh^2 g``
    and the cotangent argument taken literally in radians.  It does not invert
    :func:`p_guess_tms`; returns ``nan`` when the radicand is negative.
    """
    N = 2.0 * math.sinh(g) ** 2
    cot2 = 1.0 / math.tan(0.5 - p_target) ** 2
    radicand = (-1.0 + N * (0.5 + N) * cot2) / (2.0 + 2.0 * N)
    return math.sqrt(radicand) if radicand >= 0 else math.nan


def inverse_erf(y: float, tol: float = 1e-15) -> float:
    """Inverse error function by Newton iteration from Winitzki's approximation."""
    if not -1.0 < y < 1.0:
        raise OutOfRangeError("inverse_erf needs |y| < 1")
    if y == 0.0:
        return 0.0
    sign = 1.0 if y > 0 else -1.0
    y = abs(y)
    a = 0.147
    ln = math.log1p(-y * y)
    t = 2.0 / (math.pi * a) + ln / 2.0
    x = math.sqrt(math.sqrt(t * t - ln / a) - t)
    for _ in range(50):
        # residual in erfc form keeps precision as y -> 1
        r = (1.0 - y) - math.erfc(x) if y > 0.5 else math.erf(x) - y
        step = r / (2.0 / math.sqrt(math.pi) * math.exp(-x * x))
        x -= step
        if abs(step) <= tol * max(1.0, x):
            break
    return sign * x


def p_guess_cat(alpha: float, sigma: float) -> float:
    """Winning probability of the sign rule for the cat game.

    Bob's outcome is normal with mean ``+-sqrt(2)|alpha|`` and variance
    ``1/2 + sigma^2``: ``P = (1 + erf(|alpha| / sqrt(1/2 + sigma^2))) / 2``.
    """
    if sigma < 0 or not math.isfinite(sigma):
        raise InvalidArgumentError("sigma must be finite and nonnegative")
    return 0.5 * (1.0 + math.erf(abs(alpha) / math.sqrt(0.5 + sigma**2)))


def sigma_max_cat(p_target: float, alpha: float) -> float:
    """Printed cat-state tolerance ``sqrt(|alpha|^2 / erfinv(P)^2 - 1/2)``.

    Note that this corresponds to ``P = erf(|alpha| / sqrt(sigma^2 + 1/2))``,
    i.e. to ``2 P - 1`` of :func:`p_guess_cat`; see :func:`sigma_max_cat_binning`.
    """
    if not 0.0 < p_target < 1.0:
        raise OutOfRangeError("p_target must lie in (0, 1)")
    radicand = abs(alpha) ** 2 / inverse_erf(p_target) ** 2 - 0.5
    if radicand < -1e-12:
        raise OutOfRangeError(f"p_target={p_target} not attainable at alpha={alpha}")
    return math.sqrt(max(radicand, 0.0))


def sigma_max_cat_binning(p_target: float, alpha: float) -> float:
    """Exact inverse of :func:`p_guess_cat` in ``sigma``."""
    if not 0.5 < p_target < 1.0:
        raise OutOfRangeError("p_target must lie in (1/2, 1)")
    radicand = abs(alpha) ** 2 / inverse_erf(2.0 * p_target - 1.0) ** 2 - 0.5
    if radicand < -1e-12:
        raise OutOfRangeError(f"p_target={p_target} not attainable at alpha={alpha}")
    return math.sqrt(max(radicand, 0.0))


def _chunks(n: int):
    start = 0
    while start < n:
        yield start // CHUNK, min(CHUNK, n - start)
        start += CHUNK


def simulate_tms_game(params: GameParams) -> GameResult:
    """Monte Carlo estimate of the tms winning probability.

    Samples are drawn in chunks of ``2**20``; chunk ``k`` takes quadratures
    from stream ``2k`` and detector noise from stream ``2k + 1``.
    """
    if params.kind != "tms":
        raise InvalidArgumentError("simulate_tms_game needs kind='tms'")
    state = two_mode_squeezed_vacuum(params.g)
    corr_sign = -1.0 if state.cov[0, 2] < 0 else 1.0
    wins = 0
    for k, size in _chunks(params.samples):
        xy = sample_quadratures(state, (0.0, 0.0), size, params.seed, stream=2 * k)
        noise = params.sigma * spawn_rng(params.seed, 2 * k + 1).standard_normal(size)
        bob = corr_sign * (xy[:, 1] + noise)
        wins += int(np.count_nonzero((xy[:, 0] >= 0) == (bob >= 0)))
    return GameResult.from_counts(wins, params.samples)


def simulate_cat_game(params: GameParams) -> GameResult:
    """Monte Carlo estimate for ``|up>|alpha> - |down>|-alpha>``.

    Alice's qubit outcome picks ``|alpha>`` or ``|-alpha>``; Bob's homodyne
    outcome along ``alpha`` carries vacuum noise 1/2 plus detector noise.
    """
    if params.kind != "cat":
        raise InvalidArgumentError("simulate_cat_game needs kind='cat'")
    shift = math.sqrt(2.0) * abs(params.alpha)
    wins = 0
    for k, size in _chunks(params.samples):
        rng_a = spawn_rng(params.seed, 2 * k)
        rng_b = spawn_rng(params.seed, 2 * k + 1)
        up = rng_a.random(size) < 0.5
        y = np.where(up, shift, -shift) + math.sqrt(0.5 + params.sigma**2) * rng_b.standard_normal(size)
        wins += int(np.count_nonzero(up == (y >= 0)))
    result = GameResult.from_counts(wins, params.samples)
    printed = math.erf(abs(params.alpha) / math.sqrt(0.5 + params.sigma**2))
    log.debug(
        "cat game alpha=%g sigma=%g: empirical %.6f, sign-binning %.6f, printed-formula P %.6f",
        params.alpha, params.sigma, result.p_guess_empirical,
        p_guess_cat(params.alpha, params.sigma), printed,
    )
    return result


def simulate(params: GameParams) -> GameResult:
    return simulate_tms_game(params) if params.kind == "tms" else simulate_cat_game(params)
