"""Command-line front end.

Exit codes: 0 all verdicts pass, 1 usage or schema error, 2 pathology,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__, harness, plotting
from .errors import EnskogError, InvalidConfigurationError, PathologyError
from .scenario import corpus_paths, load_scenario

EXIT_OK, EXIT_USAGE, EXIT_PATHOLOGY, EXIT_FAILED = 0, 1, 2, 3

log = logging.getLogger("enskog_series")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _epsilons(text: str) -> list[float]:
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from exc
    if any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("epsilon values must be non-negative")
    return vals


def _non_negative(text: str) -> int:
    val = int(text)
    if val < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return val


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="report path; figures are written beside it")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=_non_negative, default=None)
    common.add_argument("--n-max", type=_non_negative, default=None)
    common.add_argument("--epsilon", type=_epsilons, default=None,
                        help="comma-separated diagnostic epsilon values")
    common.add_argument("--threads", type=_non_negative, default=1)
    common.add_argument("--no-figures", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="enskog-series", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (("simulate", "run the hard-sphere simulator"),
                       ("verify", "check the series against the simulator"),
                       ("mc", "Monte Carlo estimate for a density scenario")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--scenario", type=Path, required=True)
    p = sub.add_parser("trees", parents=[common], help="tree enumerations and counts")
    p.add_argument("--n", type=_non_negative, required=True)
    p.add_argument("--cap", type=_non_negative, default=8)
    p = sub.add_parser("corpus", parents=[common], help="run verify on every bundled scenario")
    return parser


def _write(report: harness.RunReport, out: Path | None, fmt: str) -> None:
    if fmt == "csv":
        rows = report.csv_rows
        stream = open(out, "w", newline="") if out else sys.stdout
        try:
            if rows:
                writer = csv.DictWriter(stream, fieldnames=list(rows[0]))
                writer.writeheader()
                writer.writerows(rows)
        finally:
            if out:
                stream.close()
    else:
        text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
        if out:
            out.write_text(text)
        else:
            sys.stdout.write(text)


def _figures(report: harness.RunReport, out: Path) -> list[str]:
    stem = out.with_suffix("")
    figs = report.figures
    paths = []
    if "trajectory" in figs:
        cfg, traj = figs["trajectory"]
        paths.append(plotting.plot_trajectory(cfg, traj, Path(f"{stem}_trajectory.png")))
    if "series" in figs:
        paths.append(plotting.plot_series(figs["series"], Path(f"{stem}_series.png")))
    if "microscopic" in figs:
        paths.append(plotting.plot_intervals(figs["microscopic"], Path(f"{stem}_intervals.png")))
    if "counts" in figs:
        paths.append(plotting.plot_tree_counts(figs["counts"], Path(f"{stem}_counts.png")))
    if "mc" in figs:
        paths.append(plotting.plot_mc(figs["mc"], Path(f"{stem}_mc.png")))
    return paths


def _run(args) -> harness.RunReport:
    if args.command == "trees":
        return harness.cmd_trees(args.n, args.cap)
    if args.command == "corpus":
        return _run_corpus(args)
    sc = load_scenario(args.scenario)
    if args.command == "simulate":
        return harness.cmd_simulate(sc)
    if args.command == "verify":
        return harness.cmd_verify(sc, n_max=args.n_max, epsilon=args.epsilon, seed=args.seed)
    return harness.cmd_mc(sc, n_max=args.n_max, seed=args.seed, threads=max(args.threads, 1))


def _run_corpus(args) -> harness.RunReport:
    outputs = {}
    verdicts = {}
    for path in corpus_paths():
        sc = load_scenario(path)
        if sc.kind != "particles":
            continue
        rep = harness.cmd_verify(sc, n_max=args.n_max, seed=args.seed)
        expected = True if sc.expect_pass is None else sc.expect_pass
        outputs[sc.name] = {"passed": rep.passed, "expected": expected}
        verdicts[sc.name] = rep.passed == expected
        log.info("%s: %s (expected %s)", sc.name, rep.passed, expected)
    rows = [{"scenario": k, **v} for k, v in outputs.items()]
    return harness.RunReport("corpus", None, outputs, verdicts, rows)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    start = time.perf_counter()
    try:
        report = _run(args)
    except PathologyError as exc:
        print(json.dumps({"error": "pathology", **exc.as_dict()}, default=str), file=sys.stderr)
        return EXIT_PATHOLOGY
    except (InvalidConfigurationError, EnskogError, ValueError) as exc:
        print(f"enskog-series: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    elapsed = time.perf_counter() - start
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
    _write(report, args.out, args.format)
    if args.out:
        # wall-clock lives beside the report so the report itself stays reproducible
        Path(f"{args.out.with_suffix('')}_timing.json").write_text(
            json.dumps({"command": args.command, "wall_clock_seconds": elapsed}) + "\n")
        if not args.no_figures:
            for p in _figures(report, args.out):
                log.info("figure %s", p)
    pathological = any(
        rep.get("pathologies") for key in ("microscopic", "semigroup")
        for rep in report.outputs.get(key, []) if isinstance(rep, dict)
    )
    if pathological:
        return EXIT_PATHOLOGY
    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
