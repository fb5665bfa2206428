"""``macrocat`` command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 verification-gate failure.
All subcommands are deterministic for fixed flags and seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import cavity_amplifier as cav
from . import coherence_grid as cg
from . import gaussian_core as gc
from . import guessing_game as gg
from . import macroscopicity as mc
from .errors import InvalidArgumentError, MacrocatError

DEFAULT_SEED = 0xC0FFEE
SEED_ENV = "MACROCAT_SEED"

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_GATE = 0, 1, 2, 3

INPUT_COLUMNS = ["label", "year", "v_minus", "mean_photon_number", "source_note"]
TABLE_COLUMNS = [
    "label",
    "year",
    "v_minus",
    "mean_photon_number",
    "n_eff_as_printed",
    "n_eff_derivation_consistent",
    "equivalent_cat_N_as_printed",
    "equivalent_cat_N_derivation_consistent",
    "x_C",
    "source_note",
]
DERIVED_COLUMNS = TABLE_COLUMNS[4:9]


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class GateFailure(Exception):
    """Carries the already-rendered rows so they can still be emitted."""

    def __init__(self, message: str, rows: list[dict]):
        super().__init__(message)
        self.rows = rows


class _PartialData(Exception):
    """Output is valid but some input records were skipped."""

    def __init__(self, rows: list[dict]):
        super().__init__("some records were skipped")
        self.rows = rows


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2, which means data error here
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------- output


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def render(rows: list[dict], fmt: str, columns: Sequence[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0]) if rows else []
    if fmt == "json":
        payload = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_fmt(r.get(c)) for c in columns])
        return buf.getvalue()
    cells = [[str(c) for c in columns]] + [[_fmt(r.get(c)) for c in columns] for r in rows]
    if not columns:
        return "(no rows)\n"
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    if len(cells) == 1:
        lines.append("(no rows)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- validation


def _finite(name: str, value: float, lo: float | None = None, hi: float | None = None) -> float:
    if not math.isfinite(value):
        raise InvalidArgumentError(f"--{name} must be finite")
    if lo is not None and value < lo:
        raise InvalidArgumentError(f"--{name} must be >= {lo}")
    if hi is not None and value > hi:
        raise InvalidArgumentError(f"--{name} must be <= {hi}")
    return value


def resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return DEFAULT_SEED
    try:
        return int(env, 0)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None


# ---------------------------------------------------------------- subcommands


def cmd_state(args) -> list[dict]:
    g = _finite("g", args.g)
    eta = _finite("eta", args.eta, 0.0, 1.0)
    dh1 = _finite("dh1", args.dh1, 0.0)
    dh2 = _finite("dh2", args.dh2, 0.0)
    ideal = gc.two_mode_squeezed_vacuum(g)
    noisy = gc.apply_loss(ideal, eta)
    noisy = gc.apply_quadrature_noise(noisy, 0, 0.0, dh1)
    noisy = gc.apply_quadrature_noise(noisy, 1, 0.0, dh2)
    x_sq, p_sq = gc.tms_squeezed_observables(g)
    x_anti, _ = gc.tms_antisqueezed_observables(g)

    def terms(state: gc.GaussianState) -> dict[str, float]:
        vx = gc.quadrature_variance(state, x_sq)
        vp = gc.quadrature_variance(state, p_sq)
        return {
            "mean_photon_number": gc.mean_photon_number(state),
            "var_x_squeezed": vx,
            "var_p_squeezed": vp,
            "var_x_antisqueezed": gc.quadrature_variance(state, x_anti),
            "duan_simon": vx + vp,
            "n_eff_bound_as_printed": mc.n_eff_lower_bound(vp, mc.Convention.AS_PRINTED),
            "n_eff_bound_derivation_consistent": mc.n_eff_lower_bound(vp, mc.Convention.DERIVATION_CONSISTENT),
        }

    before, after = terms(ideal), terms(noisy)
    return [{"quantity": k, "ideal": before[k], "noisy": after[k]} for k in before]


def cmd_game(args) -> list[dict]:
    kind = args.kind
    param = args.g if kind == "tms" else args.alpha
    if param is None:
        raise UsageError(f"game --kind {kind} needs --{'g' if kind == 'tms' else 'alpha'}")
    params = gg.GameParams(kind, _finite("sigma", args.sigma, 0.0), args.samples, args.seed,
                           g=param if kind == "tms" else 0.0, alpha=param if kind == "cat" else 0.0)
    result = gg.simulate(params)
    if kind == "tms":
        analytic = gg.p_guess_tms(param, args.sigma)
    else:
        analytic = gg.p_guess_cat(param, args.sigma)
    # gate against the analytic binomial spread so a degenerate sample cannot divide by zero
    spread = math.sqrt(analytic * (1.0 - analytic) / result.samples_used)
    gap = abs(result.p_guess_empirical - analytic)
    z = gap / spread if spread > 0 else (0.0 if gap == 0 else math.inf)
    row = {
        "kind": kind,
        "parameter": param,
        "sigma": args.sigma,
        "samples": result.samples_used,
        "p_analytic": analytic,
        "p_empirical": result.p_guess_empirical,
        "standard_error": result.standard_error,
        "z_score": z,
    }
    if args.p_target is not None:
        if kind == "tms":
            row["sigma_max"] = gg.sigma_max_tms(args.p_target, param)
            row["sigma_max_printed"] = gg.sigma_max_tms_printed(args.p_target, param)
        else:
            row["sigma_max"] = gg.sigma_max_cat_binning(args.p_target, param)
            row["sigma_max_printed"] = gg.sigma_max_cat(args.p_target, param)
    rows = [row]
    if not z < 5.0:
        raise GateFailure(f"empirical and analytic guess probability differ by {z:.2f} standard errors", rows)
    return rows


@dataclass
class _Parsed:
    record: mc.ExperimentRecord
    stored: dict[str, str]
    line: int


def _parse_float(text: str, column: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataError(f"line {line}: column {column!r}: cannot parse {text!r} as a number") from None


def read_records(path: str, recompute: bool) -> tuple[list[_Parsed], list[str]]:
    """Parse the experiment CSV; returns records and human-readable skip notes."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    if text.strip() == "":
        return [], []
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except csv.Error as exc:
        raise DataError(f"line 1: {exc}") from None
    missing = [c for c in INPUT_COLUMNS if c not in header]
    if missing:
        raise DataError(f"line 1: header lacks required column(s) {', '.join(missing)}")
    extra = [c for c in header if c not in INPUT_COLUMNS]
    if extra and not recompute:
        raise DataError(f"line 1: unexpected column(s) {', '.join(extra)} (pass --recompute for emitted tables)")
    if len(set(header)) != len(header):
        raise DataError("line 1: duplicate column names")
    records: list[_Parsed] = []
    skipped: list[str] = []
    try:
        for row in reader:
            line = reader.line_num
            if not row or all(cell.strip() == "" for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(f"line {line}: expected {len(header)} fields, found {len(row)}")
            cells = dict(zip(header, row))
            try:
                year = int(cells["year"])
            except ValueError:
                raise DataError(f"line {line}: column 'year': cannot parse {cells['year']!r} as an integer") from None
            v_minus = _parse_float(cells["v_minus"], "v_minus", line)
            mpn_text = cells["mean_photon_number"].strip()
            mpn = None if mpn_text == "" else _parse_float(mpn_text, "mean_photon_number", line)
            if not (math.isfinite(v_minus) and v_minus > 0):
                skipped.append(f"line {line} ({cells['label']}): v_minus={cells['v_minus']} is not positive")
                continue
            try:
                record = mc.ExperimentRecord(cells["label"], year, v_minus, mpn, cells["source_note"])
            except InvalidArgumentError as exc:
                raise DataError(f"line {line}: {exc}") from None
            records.append(_Parsed(record, cells, line))
    except csv.Error as exc:
        raise DataError(f"line {reader.line_num}: {exc}") from None
    return records, skipped


def size_table_row(record: mc.ExperimentRecord) -> dict:
    printed = mc.n_eff_lower_bound(record.v_minus, mc.Convention.AS_PRINTED)
    consistent = mc.n_eff_lower_bound(record.v_minus, mc.Convention.DERIVATION_CONSISTENT)
    return {
        "label": record.label,
        "year": record.year,
        "v_minus": record.v_minus,
        "mean_photon_number": record.mean_photon_number,
        "n_eff_as_printed": printed,
        "n_eff_derivation_consistent": consistent,
        "equivalent_cat_N_as_printed": mc.equivalent_cat_photon_number(printed),
        "equivalent_cat_N_derivation_consistent": mc.equivalent_cat_photon_number(consistent),
        "x_C": mc.coherence_range(record.v_minus),
        "source_note": record.source_note,
    }


def cmd_ingest(args) -> list[dict]:
    parsed, skipped = read_records(args.csv_path, args.recompute)
    parsed.sort(key=lambda p: p.record.year)
    rows = [size_table_row(p.record) for p in parsed]
    mismatches = []
    if args.recompute:
        for p, row in zip(parsed, rows):
            for col in DERIVED_COLUMNS:
                stored = p.stored.get(col)
                if stored is not None and stored != _fmt(row[col]):
                    mismatches.append(f"line {p.line} {col}: stored {stored}, recomputed {_fmt(row[col])}")
    for note in skipped:
        print(f"skipped {note}", file=sys.stderr)
    if skipped:
        print(f"skipped {len(skipped)} record(s) with nonpositive v_minus", file=sys.stderr)
    if mismatches:
        raise GateFailure("recomputed columns differ from stored values:\n  " + "\n  ".join(mismatches), rows)
    if skipped:
        raise _PartialData(rows)
    return rows


def cmd_cavity(args) -> list[dict]:
    chi = _finite("chi", args.chi)
    lam = _finite("lambda", args.lambda_, 0.0)
    t_min = _finite("t-min", args.t_min, 0.0)
    t_max = _finite("t-max", args.t_max, t_min)
    if chi <= 0:
        raise InvalidArgumentError("--chi must be positive")
    if args.steps < 1:
        raise InvalidArgumentError("--steps must be at least 1")
    report = cav.threshold_report(chi, lam)
    rows = []
    for t in np.linspace(t_min, t_max, args.steps + 1):
        params = cav.CavityParams(chi, lam, float(t))
        d_minus, d_plus = cav.delta_variances(params)
        rows.append({
            "t": float(t),
            "delta_minus": d_minus,
            "delta_plus": d_plus,
            "two_mode_sum_variance": 2.0 * d_minus,
            "regime": report.regime.value,
            "delta_minus_limit": report.delta_minus_limit,
            "delta_plus_limit": report.delta_plus_limit,
            "delta_plus_growth_rate": report.delta_plus_growth_rate,
        })
    return rows


def cmd_verify(args) -> list[dict]:
    from . import verification  # deferred: pulls in scipy

    results = verification.run_all()
    rows = [r.to_dict() for r in results]
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise GateFailure(f"tolerance breached: {', '.join(failed)}", rows)
    return rows


def cmd_neff(args) -> list[dict]:
    rows: list[dict] = []
    if args.g is not None:
        g = _finite("g", args.g)
        report = mc.n_eff_pure_gaussian(gc.two_mode_squeezed_vacuum(g))
        rows.append({"quantity": "n_eff_exact", "value": report.n_eff})
        rows.append({"quantity": "n_eff_closed_form", "value": math.exp(2 * abs(g)) / 2})
        rows.append({"quantity": "mean_photon_number", "value": 2 * math.sinh(g) ** 2})
        if args.cutoff:
            from . import fock_oracle as fo  # deferred: pulls in scipy

            vec = fo.tms_fock(g, args.cutoff)
            anti, _ = gc.tms_antisqueezed_observables(g)
            qfi = fo.pure_state_qfi(vec, fo.observable(anti, args.cutoff, 2))
            rows.append({"quantity": "n_eff_fock_qfi", "value": qfi / 8.0})
        for dphi_sq in args.phase_noise or ():
            rows.append({"quantity": f"cap_phase_noise[{dphi_sq!r}]", "value": mc.cap_phase_noise(dphi_sq, g)})
    if args.v_minus is not None:
        v = args.v_minus
        report = mc.lower_bound_report(v)
        for conv, bound in report.bounds.items():
            rows.append({"quantity": f"n_eff_bound[{conv}]", "value": bound})
            rows.append({"quantity": f"equivalent_cat_N[{conv}]", "value": mc.equivalent_cat_photon_number(bound)})
        rows.append({"quantity": "x_C", "value": mc.coherence_range(v)})
    if args.alpha_sq is not None:
        a = _finite("alpha-sq", args.alpha_sq, 0.0)
        rows.append({"quantity": "n_eff_cat", "value": mc.n_eff_cat(a)})
        rows.append({"quantity": "var_x_cat", "value": mc.n_eff_cat_from_definition(a)})
        rows.append({"quantity": "cat_photon_number", "value": mc.cat_photon_number(a)})
    if args.eta is not None:
        rows.append({"quantity": "cap_loss", "value": mc.cap_loss(args.eta)})
    if args.dh is not None:
        rows.append({"quantity": "cap_quadrature_noise", "value": mc.cap_quadrature_noise(*args.dh)})
    if not rows:
        raise UsageError("neff needs at least one of --g, --v-minus, --alpha-sq, --eta, --dh")
    return rows


def cmd_coherence(args) -> list[dict]:
    g = _finite("g", args.g)
    spec = cg.GridSpec(_finite("half-range", args.half_range, 0.0), args.points)
    if args.epsilon is not None:
        env = cg.EnvelopeModel.step(args.epsilon)
    elif args.gamma1 is None and args.gamma2 is None:
        env = cg.EnvelopeModel()
    else:
        env = cg.EnvelopeModel.gaussian(
            math.inf if args.gamma1 is None else args.gamma1,
            math.inf if args.gamma2 is None else args.gamma2,
        )
    from . import fock_oracle as fo  # deferred: pulls in scipy

    psi = fo.position_wavefunction(fo.tms_fock(g, args.cutoff), spec.axis)
    state = cg.GridState.normalized(spec, psi, env)
    ideal = cg.momentum_moments_ideal(state)
    both = cg.momentum_moments_decohered(state)
    rows = []
    for label, m in (("ideal", ideal), ("formula", both.formula), ("direct", both.direct)):
        if m is None:
            continue
        v = m.var_sum(-1.0 if g >= 0 else 1.0)
        rows.append({
            "route": label,
            "p1": m.p1,
            "p1_sq": m.p1_sq,
            "p2_sq": m.p2_sq,
            "p1p2": m.p1p2,
            "var_p_squeezed": v,
            "duan_simon": cg.duan_simon_grid(state, m),
            "certified_width": cg.certified_coherence_width(v),
        })
    return rows


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("table", "csv", "json"), default="table")
    common.add_argument("--output", "-o", help="write to this file instead of standard output")
    common.add_argument("--verbose", "-v", action="store_true", help="print the resolved configuration to stderr")
    common.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                        help=f"64-bit seed (default {DEFAULT_SEED:#x}, or ${SEED_ENV})")

    parser = _Parser(prog="macrocat", description="Continuous-variable macroscopicity numerics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("state", parents=[common], help="two-mode squeezed vacuum statistics before/after noise")
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--eta", type=float, default=1.0, help="loss transmission on both modes")
    p.add_argument("--dh1", type=float, default=0.0, help="quadrature-noise variance on mode 1")
    p.add_argument("--dh2", type=float, default=0.0, help="quadrature-noise variance on mode 2")
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("game", parents=[common], help="coarse-grained guessing game, analytic vs Monte Carlo")
    p.add_argument("--kind", choices=("tms", "cat"), required=True)
    p.add_argument("--g", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--p-target", type=float, dest="p_target")
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("ingest", parents=[common], help="effective-size table from experimental variances")
    p.add_argument("csv_path")
    p.add_argument("--recompute", action="store_true",
                   help="input is a previously emitted table; derived columns are recomputed and checked")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cavity", parents=[common], help="principal variances of the lossy cavity amplifier")
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--lambda", type=float, dest="lambda_", required=True)
    p.add_argument("--t-min", type=float, default=0.0, dest="t_min")
    p.add_argument("--t-max", type=float, required=True, dest="t_max")
    p.add_argument("--steps", type=int, default=20)
    p.set_defaults(func=cmd_cavity)

    p = sub.add_parser("verify", parents=[common], help="cross-module oracle agreement report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("neff", parents=[common], help="effective sizes, bounds and noise caps")
    p.add_argument("--g", type=float)
    p.add_argument("--cutoff", type=int, default=0, help="also compute the Fock-space Fisher information")
    p.add_argument("--v-minus", type=float, dest="v_minus")
    p.add_argument("--alpha-sq", type=float, dest="alpha_sq")
    p.add_argument("--eta", type=float)
    p.add_argument("--dh", type=float, nargs=2, metavar=("DH1", "DH2"))
    p.add_argument("--phase-noise", type=float, action="append", dest="phase_noise")
    p.set_defaults(func=cmd_neff)

    p = sub.add_parser("coherence", parents=[common], help="decohered momentum moments on a position grid")
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--gamma1", type=float)
    p.add_argument("--gamma2", type=float)
    p.add_argument("--epsilon", type=float, help="step envelope half-width")
    p.add_argument("--points", type=int, default=256)
    p.add_argument("--half-range", type=float, default=8.0, dest="half_range")
    p.add_argument("--cutoff", type=int, default=60)
    p.set_defaults(func=cmd_coherence)
    return parser


def _emit(rows: list[dict], args, columns: Sequence[str] | None = None) -> None:
    text = render(rows, args.format, columns)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.seed = resolve_seed(args.seed)
        if not 0 <= args.seed < 2**64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    if args.verbose:
        config = {k: v for k, v in vars(args).items() if k != "func"}
        print("config: " + json.dumps(config, sort_keys=True, default=str), file=sys.stderr)
    columns = TABLE_COLUMNS if args.command == "ingest" else None
    try:
        rows = args.func(args)
    except UsageError as exc:
        print(f"macrocat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GateFailure as exc:
        _emit(exc.rows, args, columns)
        print(f"macrocat: gate failure: {exc}", file=sys.stderr)
        return EXIT_GATE
    except _PartialData as exc:
        _emit(exc.rows, args, columns)
        return EXIT_DATA
    except DataError as exc:
        print(f"macrocat: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except MacrocatError as exc:
        print(f"macrocat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(rows, args, columns)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
