"""Command-line front end.

Exit codes: 0 all checks pass, 1 counterexample / not accretive / replay
mismatch, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import NotAccretiveError, ReportSchemaError, SectorLabError, UnknownIdError
from .harness import (
    SUITE,
    collapse_table,
    default_config,
    replay,
    run_campaign,
    shrink_counterexample,
    write_summary_csv,
)
from .inequalities import CHECKERS, REMARK_A, REMARK_B
from .linalg import TolerancePolicy, cartesian, dump_matrix, hadamard, load_matrix, matrix_to_json
from .sector import GeneratorConfig, random_sector, sector_angle

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("SECTORLAB_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SECTORLAB_SEED must be an integer, got {raw!r}") from None


def _theta(args) -> float | None:
    if args.theta is None:
        return None
    theta = math.radians(args.theta) if args.degrees else args.theta
    if not 0 <= theta < math.pi / 2:
        raise UsageError(f"theta must lie in [0, pi/2), got {theta:g} rad")
    return theta


def _tolerance(args) -> TolerancePolicy:
    if args.tol is None:
        return TolerancePolicy()
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    return TolerancePolicy(rel_tol=args.tol)


def _fmt(x) -> str:
    return "n/a" if x is None else f"{x:.6g}"


def _print_report(rep) -> None:
    w = rep.worst_residual
    print(
        f"{rep.theorem_id}: trials={rep.trials_run} hits={rep.hypothesis_hits} passes={rep.passes} "
        f"filter_rate={rep.filter_rate:.3f} worst_residual={_fmt(w['value'] if w else None)}"
    )
    for reason, count in rep.filter_reasons.items():
        print(f"  filtered {reason}: {count}")


def _writable_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {path}: {exc}") from None
    if not os.access(path, os.W_OK):
        raise UsageError(f"output directory {path} is not writable")
    return path


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


# -- subcommands ---------------------------------------------------------------


def cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    means = tuple(args.mean.split(",")) if args.mean else None
    if means is not None and len(means) != 3:
        raise UsageError("--mean takes three comma-separated ids: sigma,sigma1,sigma2")
    try:
        cfg = default_config(
            args.theorem_id,
            trials=args.trials,
            seed=seed,
            dim=args.dim,
            theta=_theta(args),
            map_id=args.map,
            mean_ids=means,
            function_id=args.function,
            exponent=args.exponent,
            tolerance=_tolerance(args),
        )
    except (UnknownIdError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    rep = run_campaign(cfg, workers=args.workers)
    shrunk = None
    if rep.counterexamples:
        first = rep.counterexamples[0]
        shrunk = shrink_counterexample(cfg.theorem_id, first["witness"], cfg.tolerance)
    if args.out:
        out = Path(args.out)
        _write(out, rep.to_json())
        if shrunk is not None:
            _write(out.with_name(out.stem + "_counterexample.json"), json.dumps(shrunk, indent=2) + "\n")
    if args.json:
        sys.stdout.write(rep.to_json())
    else:
        _print_report(rep)
        if shrunk is not None:
            print("counterexample (shrunk):")
            print(json.dumps(shrunk))
    return EXIT_OK if rep.all_passed else EXIT_FAIL


def cmd_verify_all(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    theta = _theta(args)
    out = _writable_dir(Path(args.out)) if args.out else None
    reports = []
    for tid in SUITE:
        rep = run_campaign(default_config(tid, args.trials, seed, theta=theta), workers=args.workers)
        reports.append(rep)
        if out is not None:
            _write(out / f"{tid}.json", rep.to_json())
        if not args.json:
            _print_report(rep)
    if out is not None:
        try:
            write_summary_csv(reports, out / "summary.csv")
        except OSError as exc:
            raise UsageError(f"cannot write summary: {exc}") from None
    if args.json:
        sys.stdout.write(json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=2) + "\n")
    failed = [r.theorem_id for r in reports if not r.all_passed]
    if failed and not args.json:
        print("failed: " + ", ".join(failed))
    return EXIT_FAIL if failed else EXIT_OK


def cmd_angle(args) -> int:
    try:
        a = load_matrix(args.matrix_file)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read {args.matrix_file}: {exc}") from None
    try:
        angle = sector_angle(a)
    except NotAccretiveError:
        print("not accretive")
        return EXIT_FAIL
    if args.json:
        print(json.dumps({"radians": angle, "degrees": math.degrees(angle)}))
    else:
        print(f"{angle:.10g} rad / {math.degrees(angle):.10g} deg")
    return EXIT_OK


def cmd_gen(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    bounds = None
    if args.m is not None or args.M is not None:
        if args.m is None or args.M is None:
            raise UsageError("--m and --M go together")
        bounds = (args.m, args.M)
    theta = _theta(args)
    try:
        cfg = GeneratorConfig(args.dim, 0.5 if theta is None else theta, re_bounds=bounds, seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    s = random_sector(cfg)
    if args.out:
        try:
            dump_matrix(s.matrix, args.out)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc}") from None
    else:
        print(json.dumps(matrix_to_json(s.matrix)))
    return EXIT_OK


def _show(name, m) -> None:
    m = np.asarray(m)
    rows = ["[" + ", ".join(_cx(z) for z in row) + "]" for row in m]
    print(f"{name} = [" + ", ".join(rows) + "]")


def _cx(z) -> str:
    z = complex(z)
    re, im = round(z.real, 12) + 0.0, round(z.imag, 12) + 0.0
    if im == 0:
        return f"{re:g}"
    if re == 0:
        return f"{im:g}i"
    return f"{re:g}{'+' if im > 0 else '-'}{abs(im):g}i"


def _demo_remark() -> int:
    out = CHECKERS["remark"]()
    v = out.values
    print("Phi = identity on 2x2 matrices")
    _show("A", REMARK_A)
    _show("B", REMARK_B)
    _show("Re A o Re B", hadamard(cartesian(REMARK_A)[0], cartesian(REMARK_B)[0]))
    _show("Re(A o B)", cartesian(hadamard(REMARK_A, REMARK_B))[0])
    print("spectrum of Re(A o B): " + ", ".join(f"{x:g}" for x in np.round(v["re_hadamard_spectrum"], 12) + 0.0))
    print("difference Re(A o B) - Re A o Re B")
    print("difference spectrum: " + ", ".join(f"{x:g}" for x in np.round(v["difference_spectrum"], 12) + 0.0))
    print(f"difference spectral norm: {v['difference_norm']:g}")
    print(f"relation: {v['relation']}")
    print(f"verdict: equality refuted ({'PASS' if out.passed else 'FAIL'})")
    return EXIT_OK if out.passed else EXIT_FAIL


def _demo_one_dim() -> int:
    a = np.array([[1 + 1j]])
    print("A = B = 1+i (1x1)")
    print(f"sector angle of A: {sector_angle(a):.10g} rad / {math.degrees(sector_angle(a)):.10g} deg")
    p = hadamard(a, a)
    print(f"A o B = {_cx(p[0, 0])}")
    print(f"Re(A o B) = {_cx(p[0, 0].real)}, so A o B is not accretive")
    print(f"Re A o Re B = {_cx(1.0)}, Im A o Im B = {_cx(1.0)} (nonnegative)")
    print("Re(A o B) = Re A o Re B - Im A o Im B = 0 <= 1")
    return EXIT_OK


def _demo_collapse() -> int:
    rows = collapse_table()
    print(f"{'checker':<8} {'ancestor':<9} {'residual':>14} {'ancestor':>14} {'gap':>10}")
    ok = True
    for r in rows:
        ok &= r["gap"] <= 1e-9 and r["pass"] == r["ancestor_pass"]
        print(
            f"{r['theorem_id']:<8} {r['ancestor']:<9} {r['residual']:>14.6e} "
            f"{r['ancestor_residual']:>14.6e} {r['gap']:>10.2e}"
        )
    print("theta = 0 collapse " + ("coherent" if ok else "INCOHERENT"))
    return EXIT_OK if ok else EXIT_FAIL


_DEMOS = {"remark": _demo_remark, "one-dim": _demo_one_dim, "collapse": _demo_collapse}


def cmd_demo(args) -> int:
    return _DEMOS[args.name]()


def cmd_replay(args) -> int:
    try:
        rep = replay(args.report, workers=args.workers)
    except (ReportSchemaError, UnknownIdError, KeyError, ValueError, OSError) as exc:
        raise UsageError(f"cannot replay {args.report}: {exc}") from None
    if args.json:
        sys.stdout.write(rep.to_json())
    else:
        _print_report(rep)
        print("digest " + ("matches" if rep.replay_matches else "MISMATCH"))
    return EXIT_OK if rep.replay_matches else EXIT_FAIL


# -- parser --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _add_common(p, theta=True):
    p.add_argument("--seed", type=int, default=None, help="base seed (default: $SECTORLAB_SEED or 0)")
    if theta:
        p.add_argument("--theta", type=float, default=None, help="sector half-angle (radians)")
        p.add_argument("--degrees", action="store_true", help="read --theta in degrees")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sectorlab", description="Randomized verification of sector-matrix inequalities.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", help="run one theorem campaign")
    p.add_argument("theorem_id", choices=sorted(CHECKERS), metavar="theorem_id")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--map", default=None, help="map id, e.g. perm:cycle or submatrix:0,1")
    p.add_argument("--mean", default=None, help="sigma,sigma1,sigma2")
    p.add_argument("--function", default=None, help="function id, e.g. power:0.5")
    p.add_argument("--exponent", type=float, default=None, help="fix r / t instead of sampling it")
    p.add_argument("--tol", type=float, default=None, help="relative tolerance")
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("verify-all", help="run the whole theorem suite")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--out", default=None, help="directory for reports and summary.csv")
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_verify_all)

    p = sub.add_parser("angle", help="certified sector angle of a matrix file")
    p.add_argument("matrix_file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_angle)

    p = sub.add_parser("gen", help="generate a random sector matrix")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--m", type=float, default=None, help="lower spectral bound of Re A")
    p.add_argument("--M", type=float, default=None, help="upper spectral bound of Re A")
    p.add_argument("--out", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("demo", help="fixed narrated computations")
    p.add_argument("name", choices=sorted(_DEMOS))
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("replay", help="re-run a saved report and compare digests")
    p.add_argument("report")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for attr in ("trials", "workers", "dim"):
        val = getattr(args, attr, None)
        if val is not None and val < 1:
            print(f"sectorlab: error: --{attr} must be >= 1", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sectorlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SectorLabError as exc:
        print(f"sectorlab: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
