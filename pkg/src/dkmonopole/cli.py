"""Command-line front end: show, verify, solve, sweep.

Exit status is 0 when every check passes, 1 when a check fails (its name is
printed on stderr) and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

from . import reports
from .algebra import DKBasis, basis_change_matrix, betas, spin_generators
from .symmetry import parity_operator

OUTPUT_ENV = "DKMONOPOLE_OUTPUT_DIR"


class UsageError(Exception):
    pass


def _matrices(basis: DKBasis, which: str):
    out = []
    if which in ("beta", "all"):
        out += list(betas(basis))
    if which in ("j", "all"):
        out += [m for (a, b), m in sorted(spin_generators(basis).items()) if a < b]
    if which in ("parity", "all"):
        out.append(parity_operator(basis))
    if which in ("U", "all"):
        out.append(basis_change_matrix())
    return out


def _show(args) -> tuple[str, str, int]:
    mats = _matrices(DKBasis(args.basis), args.which)
    if args.format == "json":
        doc = {"basis": args.basis, "matrices": [
            {"label": m.label, "basis": m.basis.value,
             "real": m.entries.real.tolist(), "imag": m.entries.imag.tolist()} for m in mats]}
        return reports.dumps(doc), "matrices.json", 0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "basis", "row", "col", "re", "im"])
    for m in mats:
        for i in range(10):
            for k in range(10):
                z = m.entries[i, k]
                w.writerow([m.label, m.basis.value, i + 1, k + 1, format(z.real, ".17g"), format(z.imag, ".17g")])
    return buf.getvalue(), "matrices.csv", 0


def _verify(args) -> reports.Report:
    s = args.suite
    if s == "algebra":
        return reports.algebra_suite(args.seed)
    if s == "gauge":
        return reports.gauge_suite(args.seed, transforms=args.trials)
    if s == "separation":
        return reports.separation_suite(args.kappa, args.j, args.m, trials=args.trials, seed=args.seed,
                                        epsilon=args.epsilon, mass=args.mass)
    if s == "lorentz":
        return reports.lorentz_suite(args.kappa or 1.0, args.j or 2.0, args.epsilon, args.mass, seed=args.seed)
    return reports.parity_suite(args.kappa or 1.0, args.j or 2.0, args.epsilon, args.mass, args.case, args.seed)


def _output_path(args, default_name: str) -> Path | None:
    if args.output:
        return Path(args.output)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env) / default_name
    return None


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _finish(rep: reports.Report, args) -> int:
    _emit(rep.to_json(), _output_path(args, f"{rep.suite}.json"))
    if not rep.passed:
        for name in rep.failing():
            print(f"FAILED: {name}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    def common(parser, default):
        parser.add_argument("--seed", type=int, default=0 if default is None else default)
        parser.add_argument("--output", "-o", default=default,
                            help=f"output file (default: stdout, or ${OUTPUT_ENV}/<suite>.json)")

    p = argparse.ArgumentParser(prog="dkmonopole", description=__doc__.splitlines()[0])
    common(p, None)
    # the same flags after the subcommand; SUPPRESS keeps them from clobbering earlier values
    shared = argparse.ArgumentParser(add_help=False)
    common(shared, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    sh = sub.add_parser("show", parents=[shared], help="print DK matrices")
    sh.add_argument("what", choices=["matrices"])
    sh.add_argument("--basis", choices=[b.value for b in DKBasis], default="cyclic")
    sh.add_argument("--which", choices=["beta", "j", "parity", "U", "all"], default="beta")
    sh.add_argument("--format", choices=["json", "csv"], default="json")

    v = sub.add_parser("verify", parents=[shared], help="run a verification suite")
    v.add_argument("suite", choices=sorted(reports.SUITES))
    v.add_argument("--kappa", type=float)
    v.add_argument("--j", type=float)
    v.add_argument("--m", type=float)
    v.add_argument("--epsilon", type=float, default=1.3)
    v.add_argument("--mass", type=float, default=1.0)
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--case", choices=["b", "c"], default="b")

    so = sub.add_parser("solve", parents=[shared], help="radial solutions as CSV")
    so.add_argument("kind", choices=["minimal", "radial"])
    so.add_argument("--kappa", type=float, required=True)
    so.add_argument("--j", type=float)
    so.add_argument("--epsilon", type=float, required=True)
    so.add_argument("--mass", type=float, required=True)
    so.add_argument("--r-min", type=float)
    so.add_argument("--r-max", type=float, default=10.0)
    so.add_argument("--steps", type=int, default=4096)
    so.add_argument("--growing", action="store_true", help="minimal case: take the growing branch")
    so.add_argument("--csv", help="where to write the profile (default: next to the report)")

    sw = sub.add_parser("sweep", parents=[shared], help="lorentz + parity over the (kappa, j, epsilon, m) grid")
    sw.add_argument("--pairs", type=int, default=5, help="random (epsilon, m) pairs per (kappa, j)")
    sw.add_argument("--workers", type=int, default=4)
    return p


def _solve(args) -> int:
    if args.kind == "minimal":
        rng = (args.r_min or 0.1, args.r_max)
        rep, prof = reports.minimal_report(args.kappa, args.epsilon, args.mass, rng, args.steps,
                                           args.growing, args.seed)
        print(f"{rep.extra['kind']} rate {rep.extra['rate']:.12g}, "
              f"residual {max(c.residual for c in rep.checks):.3e}", file=sys.stderr)
    else:
        if args.j is None:
            raise UsageError("solve radial needs --j")
        rng = (args.r_min or 1.0, args.r_max)
        rep, prof = reports.radial_report(args.kappa, args.j, args.epsilon, args.mass, rng, args.steps,
                                          args.seed)
    out = _output_path(args, f"{rep.suite}.json")
    csv_path = Path(args.csv) if args.csv else (out.with_suffix(".csv") if out else None)
    if csv_path is not None:
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        prof.to_csv(csv_path)
        rep.extra["csv"] = str(csv_path)
    return _finish(rep, args)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    try:
        if args.command == "show":
            text, name, code = _show(args)
            _emit(text, _output_path(args, name))
            return code
        if args.command == "verify":
            return _finish(_verify(args), args)
        if args.command == "solve":
            return _solve(args)
        return _finish(reports.sweep(args.seed, args.pairs, args.workers), args)
    except (UsageError, ValueError) as exc:
        print(f"dkmonopole: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
