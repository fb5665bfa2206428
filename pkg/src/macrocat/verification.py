"""Cross-module oracle checks behind ``macrocat verify``.

Each check recomputes a quantity by two independent routes and reports the
largest deviation against a fixed tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cavity_amplifier as cav
from . import coherence_grid as cg
from . import fock_oracle as fo
from . import gaussian_core as gc

TOLERANCES = {
    "gaussian-vs-fock": 1e-8,
    "closed-form-vs-rk4": 1e-8,
    "decomposition-paths": 1e-6,
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    cases: int
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "cases": self.cases,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "status": "pass" if self.passed else "FAIL",
        }


def gaussian_vs_fock(gs=(0.1, 0.4, 0.7), cutoff: int = 60) -> CheckResult:
    worst = 0.0
    for g in gs:
        state = gc.two_mode_squeezed_vacuum(g)
        vec = fo.tms_fock(g, cutoff)
        worst = max(
            worst,
            float(np.max(np.abs(fo.mean_vector(vec) - state.mean))),
            float(np.max(np.abs(fo.covariance_matrix(vec) - state.cov))),
        )
    return CheckResult("gaussian-vs-fock", len(gs), worst, TOLERANCES["gaussian-vs-fock"])


def closed_form_vs_rk4() -> CheckResult:
    cases = [(1.0, 0.0, 1.0), (1.0, 0.6, 1.5), (1.0, 1.0, 2.0), (0.5, 1.5, 3.0)]
    seeds = (0.3 + 0.2j, -0.1 + 0.4j, -0.05)
    worst = 0.0
    for chi, lam, t in cases:
        params = cav.CavityParams(chi, lam, t)
        step = 0.01 / max(chi, lam)
        exact = cav.propagate_scalars(*seeds, params)
        numeric = cav.ode_integrate(*seeds, params, step)
        worst = max(worst, *(abs(a - b) for a, b in zip(exact, numeric)))
        # seeded along (1, -1)/sqrt(2) with kappa0 = -1/2, -kappa(t) is Delta_-
        r = 1 / math.sqrt(2)
        d_minus, _ = cav.delta_variances(params)
        k_exact = cav.propagate_scalars(r, -r, -0.5, params)[2]
        k_rk4 = cav.ode_integrate(r, -r, -0.5, params, step)[2]
        worst = max(worst, abs(k_exact - k_rk4), abs(-k_rk4 - d_minus))
    return CheckResult("closed-form-vs-rk4", len(cases), worst, TOLERANCES["closed-form-vs-rk4"])


def decomposition_paths(g: float = 0.4, half_range: float = 8.0, points: int = 256) -> CheckResult:
    spec = cg.GridSpec(half_range, points)
    psi = fo.position_wavefunction(fo.tms_fock(g, 60), spec.axis)
    base = cg.GridState.normalized(spec, psi)
    envelopes = [cg.EnvelopeModel(), cg.EnvelopeModel.gaussian(0.5, 1.3), cg.EnvelopeModel.gaussian(3.0, 3.0)]
    worst = 0.0
    for env in envelopes:
        both = cg.momentum_moments_decohered(base.with_envelope(env))
        a, b = both.formula, both.direct
        fields = ("p1", "p2", "p1_sq", "p2_sq", "p1p2")
        worst = max(worst, *(abs(getattr(a, f) - getattr(b, f)) for f in fields))
    return CheckResult("decomposition-paths", len(envelopes), worst, TOLERANCES["decomposition-paths"])


def run_all() -> list[CheckResult]:
    return [gaussian_vs_fock(), closed_form_vs_rk4(), decomposition_paths()]
