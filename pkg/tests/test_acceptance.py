import csv
import io
import math
import subprocess
import sys
from importlib import resources

import numpy as np
import pytest
from scipy.optimize import brentq

from macrocat import cavity_amplifier as cav
from macrocat import cli
from macrocat import coherence_grid as cg
from macrocat import fock_oracle as fo
from macrocat import gaussian_core as gc
from macrocat import guessing_game as gg
from macrocat import macroscopicity as mc

HALF_PI = math.pi / 2


def test_duan_simon_identity(criterion):
    with criterion(1, "Duan-Simon value of tms(g) equals 2exp(-2g)", 1.0):
        rng = np.random.default_rng(1)
        for g in rng.uniform(0, 3, 100):
            value = gc.duan_simon_value(gc.two_mode_squeezed_vacuum(g), 1.0, 0.0, HALF_PI, 0.0, HALF_PI)
            assert abs(value - 2 * math.exp(-2 * g)) < 1e-12


def test_gaussian_and_fock_moments_agree(criterion):
    with criterion(2, "Gaussian and Fock moments agree at cutoff 60", 30.0):
        for g in np.linspace(0, 0.7, 8):
            vec = fo.tms_fock(g, 60)
            state = gc.two_mode_squeezed_vacuum(g)
            assert np.max(np.abs(fo.mean_vector(vec) - state.mean)) < 1e-8
            assert np.max(np.abs(fo.covariance_matrix(vec) - state.cov)) < 1e-8
            assert abs(fo.mean_photon_number(vec) - gc.mean_photon_number(state)) < 1e-8
            for obs in gc.tms_squeezed_observables(g) + gc.tms_antisqueezed_observables(g):
                fock = fo.pure_state_variance(vec, fo.observable(obs, 60, 2))
                assert abs(fock - gc.quadrature_variance(state, obs)) < 1e-8


def test_guess_probability(criterion):
    with criterion(3, "Monte Carlo guess probability and sigma_max round trip", 60.0):
        rng = np.random.default_rng(3)
        pairs = list(zip(rng.uniform(0.2, 2.5, 20), rng.uniform(0.0, 2.0, 20)))
        for i, (g, sigma) in enumerate(pairs):
            res = gg.simulate(gg.GameParams("tms", float(sigma), 1_000_000, seed=100 + i, g=float(g)))
            assert abs(res.p_guess_empirical - gg.p_guess_tms(g, sigma)) < 4 * res.standard_error
            p = gg.p_guess_tms(g, sigma)
            assert abs(gg.p_guess_tms(g, gg.sigma_max_tms(p, g)) - p) < 1e-9


def test_effective_size(criterion):
    with criterion(4, "effective size of tms and cats", 10.0):
        for g in np.linspace(0, 3, 31):
            n_eff = mc.n_eff_pure_gaussian(gc.two_mode_squeezed_vacuum(g)).n_eff
            assert abs(n_eff - math.exp(2 * g) / 2) <= 1e-12 * math.exp(2 * g) / 2
        for g in (0.1, 0.3, 0.5):
            report = mc.n_eff_pure_gaussian(gc.two_mode_squeezed_vacuum(g))
            obs = gc.quadrature(0, report.optimal_angles[0]) + gc.quadrature(1, report.optimal_angles[1])
            qfi = fo.pure_state_qfi(fo.tms_fock(g, 60), fo.observable(obs, 60, 2))
            assert abs(qfi / 8 - report.n_eff) < 1e-8
        for a2 in np.linspace(0, 6, 61):
            assert mc.n_eff_cat(a2) == pytest.approx(2 * a2 / (1 + math.exp(-2 * a2)), rel=1e-14, abs=0)
        for n in range(2, 9):
            for a2 in np.linspace(0.01, 5, 100):
                assert mc.n_eff_cat(n * a2) > mc.n_eff_kitten_product(a2, n)


def test_ingest_anchor(criterion, tmp_path, capsys):
    with criterion(5, "ingest anchor and equivalent cats under both conventions", 1.0):
        path = tmp_path / "anchor.csv"
        path.write_text(f"label,year,v_minus,mean_photon_number,source_note\nanchor,2000,{1 / 1.2!r},,\n")
        assert cli.main(["ingest", str(path), "--format", "csv"]) == 0
        row = next(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert float(row["n_eff_as_printed"]) == 1.2
        printed = float(row["equivalent_cat_N_as_printed"])
        consistent = float(row["equivalent_cat_N_derivation_consistent"])
        for target, value in ((1.2, printed), (float(row["n_eff_derivation_consistent"]), consistent)):
            a2 = brentq(lambda a: mc.n_eff_cat(a) - target, 1e-12, 20, xtol=1e-15)
            assert value == pytest.approx(a2 * math.tanh(a2), abs=1e-10)
        assert abs(consistent - 0.2) <= 0.05
        assert abs(printed - 0.47) <= 0.02
        print(f"equivalent cat photon number: as-printed {printed:.5f}, derivation-consistent {consistent:.5f}")


def test_noise_caps(criterion):
    with criterion(6, "noise caps and phase-noise slope", 1.0):
        assert mc.cap_loss(0.9) == 10
        assert mc.cap_quadrature_noise(0.05, 0.05) == 10
        gs = np.linspace(2, 4, 41)
        logs = np.log([mc.cap_phase_noise(0.01, g) for g in gs])
        assert np.all(np.abs(np.diff(logs) / np.diff(gs) + 2) <= 0.01)


def test_cavity_amplifier(criterion):
    with criterion(7, "cavity amplifier closed form, purity and asymptotes", 30.0):
        r = 1 / math.sqrt(2)
        series_points = 0
        for chi in np.arange(1, 11) * 0.25:
            for lam in np.arange(0, 10) * 0.25:
                series_points += lam == chi
                # finer than the 0.01/rate cap so the absolute error stays below 1e-8 where Delta_+ ~ 1e4
                step = 0.0015 / max(chi, lam)
                for frac in (0.1, 0.3, 0.5, 0.75, 1.0):
                    params = cav.CavityParams(float(chi), float(lam), float(frac * 5 / chi))
                    d_minus, d_plus = cav.delta_variances(params)
                    # seeded along (1, -+1)/sqrt(2) with kappa0 = -1/2, -kappa(t) is Delta_-+
                    assert abs(-cav.ode_integrate(r, -r, -0.5, params, step)[2] - d_minus) < 1e-8
                    assert abs(-cav.ode_integrate(r, r, -0.5, params, step)[2] - d_plus) < 1e-8
        assert series_points == 9
        for chi, t in ((0.5, 1.0), (1.0, 2.5), (2.0, 2.5)):
            d_minus, d_plus = cav.delta_variances(cav.CavityParams(chi, 0.0, t))
            assert abs(d_minus * d_plus - 0.25) < 1e-10
        for chi, lam in ((1.0, 2.0), (0.5, 3.0), (1.0, 1.0), (1.0, 0.5), (2.0, 0.3)):
            d_minus, d_plus = cav.delta_variances(cav.CavityParams(chi, lam, 400.0 / (chi + lam)))
            assert d_minus == pytest.approx(lam / (2 * (lam + chi)), rel=1e-12)
            if lam > chi:
                assert d_plus == pytest.approx(lam / (2 * (lam - chi)), rel=1e-12)


def test_decoherence_envelopes(criterion):
    with criterion(8, "decomposition paths, gaussian correction, step independence", 120.0):
        spec = cg.GridSpec(8.0, 256)
        psi = fo.position_wavefunction(fo.tms_fock(0.4, 60), spec.axis)
        base = cg.GridState.normalized(spec, psi)
        ideal = cg.momentum_moments_ideal(base)
        for g1, g2 in ((0.5, 0.5), (0.5, 5.0), (1.3, 2.1), (5.0, 5.0), (3.0, math.inf)):
            state = base.with_envelope(cg.EnvelopeModel.gaussian(g1, g2))
            a = cg.moments_from_decomposition(state)
            b = cg.moments_from_kernel(state)
            assert np.max(np.abs(np.array(a.as_tuple()) - np.array(b.as_tuple()))) < 1e-6
            assert abs(b.p2 - a.p2) < 1e-6
            extra = 1 / g1**2 + 1 / g2**2
            assert abs(b.var_sum(-1.0) - ideal.var_sum(-1.0) - extra) < 1e-6
        values = []
        for eps in np.linspace(0.02, 0.5, 7):
            state = base.with_envelope(cg.EnvelopeModel.step(float(eps)))
            values.append(cg.duan_simon_grid(state, cg.moments_from_kernel(state)))
        assert max(values) - min(values) < 1e-3


def test_cli_determinism(criterion):
    sample = str(resources.files("macrocat") / "data" / "experiments_sample.csv")
    invocations = [
        ["state", "--g", "0.5", "--eta", "0.9", "--dh1", "0.02", "--dh2", "0.01"],
        ["game", "--kind", "tms", "--g", "1.0", "--sigma", "0.5", "--samples", "50000", "--p-target", "0.75"],
        ["game", "--kind", "cat", "--alpha", "1.5", "--sigma", "0.8", "--samples", "50000"],
        ["ingest", sample],
        ["cavity", "--chi", "1", "--lambda", "0.6", "--t-max", "3", "--steps", "6"],
        ["verify"],
        ["neff", "--g", "0.4", "--cutoff", "30", "--v-minus", "0.5", "--alpha-sq", "2", "--phase-noise", "0.01"],
        ["coherence", "--g", "0.4", "--gamma1", "1.5", "--epsilon", "0.1"],
    ]
    with criterion(9, "every subcommand is byte-identical across two runs", 10.0):
        procs = [
            subprocess.Popen([sys.executable, "-m", "macrocat", *argv, "--format", "csv", "--seed", "12345"],
                             stdout=subprocess.PIPE, stderr=subprocess.PIPE)
            for argv in invocations
            for _ in range(2)
        ]
        outputs = [p.communicate() + (p.returncode,) for p in procs]
        for i, argv in enumerate(invocations):
            first, second = outputs[2 * i], outputs[2 * i + 1]
            assert first[2] == 0, (argv, first[1])
            assert first[0] and first == second, argv
