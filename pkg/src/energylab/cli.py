"""Command-line interface: ``energylab {simulate,audit,check,spectrum,classify}``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

from .audit import classify, flux_convergence, theorem_check
from .config import RunConfig
from .errors import EnergyLabError
from .fileio import (
    BUDGET_COLUMNS,
    SNAPSHOT_INDEX_COLUMNS,
    atomic_write_bytes,
    csv_text,
    load_run,
    read_snapshot,
    write_csv,
    write_run,
)
from .kernels import BACKEND
from .spectral import shell_spectrum
from .suites import SUITES, run_suite

log = logging.getLogger("energylab")

REGULARITY_COLUMNS = ("quantity", "r", "s", "value", "serrin", "shinbrot", "new_scaling")
SPECTRUM_COLUMNS = ("shell", "energy")

EPILOG = f"""\
CSV files (header row first, numbers with 17 significant digits):
  budget.csv            {', '.join(BUDGET_COLUMNS)}
  snapshots.csv         {', '.join(SNAPSHOT_INDEX_COLUMNS)}
  defect_report.csv     t0, t, kappa, ee_defect, lemma_defect, low_pass_defect,
                        flux_integral, hh_integral, lh_integral, max_majorant_ratio
  regularity_report.csv {', '.join(REGULARITY_COLUMNS)}
  spectrum (stdout)     {', '.join(SPECTRUM_COLUMNS)}

Exit status: 0 success, 1 check or audit failure, 2 usage error.
Environment: ENERGYLAB_THREADS caps internal threads (0 = all cores);
ENERGYLAB_PURE_PYTHON=1 disables the compiled kernels.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _exponent(text: str):
    if text.strip().lower() in ("inf", "infinity"):
        return "inf"
    try:
        value = Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, 'p/q' or 'inf', got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"exponent must be >= 1, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="energylab",
        description="Spectral Navier-Stokes runs and energy-equality audits on the periodic box.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a configured simulation into a run directory", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out-dir", type=Path, help="overrides [output] dir")

    p = sub.add_parser("audit", help="flux and energy-equality audit of a run directory", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--run-dir", required=True, type=Path)
    p.add_argument("--kappas", type=_float_list, help="comma-separated increasing cutoffs")
    p.add_argument("--t0", type=float)
    p.add_argument("--t", type=float)

    p = sub.add_parser("check", help="run a built-in property suite")
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("spectrum", help="shell-energy CSV of a snapshot on stdout")
    p.add_argument("--snapshot", required=True, type=Path)

    p = sub.add_parser("classify", help="Serrin / Shinbrot / scaling flags for L^r_t L^s_x")
    p.add_argument("--r", required=True, type=_exponent)
    p.add_argument("--s", required=True, type=_exponent)
    return parser


def _fraction_text(x: Fraction) -> str:
    return f"{float(x)!r} ({x})"


def _exponent_text(x) -> str:
    return "inf" if x is None else str(x)


def cmd_classify(args, out) -> int:
    flags = classify(args.r, args.s)
    out.write(f"r = {_exponent_text(flags.r)}\n")
    out.write(f"s = {_exponent_text(flags.s)}\n")
    out.write(f"serrin_value = {_fraction_text(flags.serrin_value)}\n")
    out.write(f"serrin = {str(flags.satisfies_serrin).lower()}\n")
    out.write(f"shinbrot_value = {_fraction_text(flags.shinbrot_value)}\n")
    out.write(f"shinbrot = {str(flags.satisfies_shinbrot).lower()}\n")
    out.write(f"new_scaling_value = {_fraction_text(flags.new_scaling_value)}\n")
    out.write(f"new_scaling = {str(flags.on_new_scaling).lower()}\n")
    return 0


def cmd_check(args, out) -> int:
    results = run_suite(args.suite, args.seed)
    for r in results:
        out.write(r.line() + "\n")
    failed = [r for r in results if not r.passed]
    if failed:
        out.write(f"FAILED: {failed[0].name}\n")
        return 1
    out.write(f"suite {args.suite}: {len(results)} checks passed\n")
    return 0


def cmd_spectrum(args, out) -> int:
    field, _, _ = read_snapshot(args.snapshot)
    shells, energy = shell_spectrum(field)
    out.write(csv_text(SPECTRUM_COLUMNS, zip((int(k) for k in shells), (float(e) for e in energy))))
    return 0


def cmd_simulate(args, out) -> int:
    config = RunConfig.load(args.config)
    if args.out_dir is not None:
        config = RunConfig.from_dict({**config.to_dict(), "output": {"dir": str(args.out_dir)}})
    run_dir = Path(config.output_dir)
    log.info("simulating n=%d nu=%g dt=%g t_end=%g into %s (%s kernels)", config.n, config.nu, config.dt, config.t_end, run_dir, BACKEND)
    traj = write_run(config, run_dir)
    out.write(f"wrote {len(traj.times)} snapshots and {len(traj.budget)} budget samples to {run_dir}\n")
    return 0


def _regularity_rows(reg):
    rows = [
        ("l3_v56", 3.0, "", reg.l3_v56, "", "", ""),
        ("sup_l2", math.inf, 2.0, reg.sup_l2, "", "", ""),
        ("l2_h1", 2.0, "", reg.l2_h1, "", "", ""),
    ]
    for row in reg.lrls_table:
        f = row.flags
        rows.append(("lrls", row.r, row.s, row.norm, str(f.satisfies_serrin).lower(),
                     str(f.satisfies_shinbrot).lower(), str(f.on_new_scaling).lower()))
    return rows


def cmd_audit(args, out) -> int:
    traj, config = load_run(args.run_dir)
    kappas = args.kappas if args.kappas else config.kappa_ladder()
    span = (float(traj.times[0]), float(traj.times[-1]))
    if args.t0 is not None or args.t is not None:
        windows = [(span[0] if args.t0 is None else args.t0, span[1] if args.t is None else args.t)]
    elif config.windows:
        windows = [tuple(w) for w in config.windows]
    else:
        windows = [span]
    report = flux_convergence(traj, kappas, windows)
    verdict = theorem_check(traj)
    write_csv(args.run_dir / "defect_report.csv", report.COLUMNS, report.table())
    write_csv(args.run_dir / "regularity_report.csv", REGULARITY_COLUMNS, _regularity_rows(verdict.regularity))

    low, high = report.rows[0], [r for r in report.rows if r.kappa == kappas[-1]][0]
    lines = [
        f"run_dir = {args.run_dir}",
        f"grid = {config.n}^3, nu = {config.nu!r}, t_end = {config.t_end!r}",
        f"energy_scale = {report.scale:.17g}",
        f"ee_defect = {verdict.ee_defect:.17g}",
        f"ee_tolerance = {verdict.tolerance:.17g}",
        f"hypotheses_finite = {str(verdict.hypotheses_finite).lower()}",
        f"l3_v56 = {verdict.regularity.l3_v56:.17g}",
        f"flux_integral(kappa={low.kappa:g}) = {low.flux_integral:.17g}",
        f"flux_integral(kappa={high.kappa:g}) = {high.flux_integral:.17g}",
        f"majorant_constant = {report.majorant_constant!r}",
        f"envelope_ok = {str(report.envelope_ok).lower()}",
        f"top_rung_ok = {'n/a' if report.top_rung_ok is None else str(report.top_rung_ok).lower()}",
        f"tail_fraction = {verdict.tail_fraction:.3e}",
        *(f"note: {n}" for n in verdict.notes),
        f"theorem_check = {'PASS' if verdict.passed else 'FAIL'}",
    ]
    text = "\n".join(lines) + "\n"
    atomic_write_bytes(args.run_dir / "summary.txt", text.encode())
    out.write(text)
    ok = verdict.passed and report.envelope_ok and report.top_rung_ok is not False
    return 0 if ok else 1


COMMANDS = {
    "simulate": cmd_simulate,
    "audit": cmd_audit,
    "check": cmd_check,
    "spectrum": cmd_spectrum,
    "classify": cmd_classify,
}


def _setup_logging(verbose: bool):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.handlers = [handler]
    log.setLevel(logging.DEBUG if verbose else logging.INFO)
    log.propagate = False


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _setup_logging(args.verbose)
    try:
        return COMMANDS[args.command](args, out)
    except (EnergyLabError, OSError, ValueError) as exc:
        print(f"energylab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


run_cli = main

if __name__ == "__main__":
    sys.exit(main())
