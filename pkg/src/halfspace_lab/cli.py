"""Command-line front end.

Exit codes: 0 success, 1 usage or config error, 2 assertion failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

from . import suites, svgplot, tables
from .experiments import ConfigError, ExperimentConfig, aggregate, check_assertions, results_to_csv, run_trials

SEED_ENV = "HALFSPACE_LAB_SEED"
EXIT_OK, EXIT_CONFIG, EXIT_ASSERT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else " / ".join(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_json_safe(obj), indent=2, sort_keys=True) + "\n")


def _seed_override(flag):
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return None
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _out_dir(p: str) -> Path:
    out = Path(p)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text())
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        seed = _seed_override(args.seed)
        if seed is not None:
            raw["seed"] = seed
        cfg = ExperimentConfig.from_dict(raw)
    except FileNotFoundError:
        print(f"error: config file {args.config} not found", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as e:
        print(f"error: config is not valid JSON: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(args.out)
    results = run_trials(cfg, n_jobs=args.jobs)
    (out / "results.csv").write_text(results_to_csv(results))
    stats = aggregate(results, cfg.epsilon)
    checks = check_assertions(stats, cfg.assertions)
    passed = all(c["passed"] for c in checks)
    _write_json(out / "report.json", {"config": cfg.to_dict(), "stats": stats, "assertions": checks, "passed": passed})
    for c in checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['metric']} {c['op']} {c['value']} (observed {c['observed']})")
    return EXIT_OK if passed else EXIT_ASSERT


def cmd_table(args) -> int:
    out = _out_dir(args.out)
    result = tables.TABLES[args.which]()
    text = tables.render(result)
    (out / f"table_{args.which}.txt").write_text(text)
    with open(out / "results.csv", "w", newline="") as fp:
        w = csv.DictWriter(fp, fieldnames=tables.FIT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in result["rows"]:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    _write_json(out / "report.json", {"table": args.which, "verdicts": result["verdicts"], "passed": result["ok"]})
    print(text, end="")
    return EXIT_OK if result["ok"] else EXIT_ASSERT


def cmd_verify(args) -> int:
    try:
        seed = _seed_override(args.seed)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(args.out)
    report = suites.run_all(seed=0 if seed is None else seed, quick=args.quick)
    _write_json(out / "report.json", report)
    for name, s in report["suites"].items():
        print(f"{'PASS' if s['ok'] else 'FAIL'} {name}")
    return EXIT_OK if report["ok"] else EXIT_ASSERT


def cmd_plot(args) -> int:
    try:
        with open(args.inp, newline="") as fp:
            rows = list(csv.DictReader(fp))
    except FileNotFoundError:
        print(f"error: {args.inp} not found", file=sys.stderr)
        return EXIT_CONFIG
    if not rows:
        print("error: CSV has no data rows", file=sys.stderr)
        return EXIT_CONFIG
    for col in (args.x, args.y):
        if col not in rows[0]:
            print(f"error: column {col!r} not in CSV (have {', '.join(rows[0])})", file=sys.stderr)
            return EXIT_CONFIG
    try:
        xs = [float(r[args.x]) for r in rows if r[args.x] != "" and r[args.y] != ""]
        ys = [float(r[args.y]) for r in rows if r[args.x] != "" and r[args.y] != ""]
        svg = svgplot.line_plot(xs, ys, args.x, args.y, logx=args.logx)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    Path(args.out).write_text(svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="halfspace-lab", description="Contrastive-example learning experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run a configured experiment")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--jobs", type=int, default=1, help="worker processes for trials")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("table", help="reproduce a result table at desk scale")
    t.add_argument("--which", required=True, choices=sorted(tables.TABLES))
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_table)

    v = sub.add_parser("verify", help="run the property suites")
    v.add_argument("--out", required=True)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--quick", action="store_true", help="smaller samples")
    v.set_defaults(func=cmd_verify)

    pl = sub.add_parser("plot", help="plot two CSV columns as SVG")
    pl.add_argument("--in", dest="inp", required=True)
    pl.add_argument("--x", required=True)
    pl.add_argument("--y", required=True)
    pl.add_argument("--out", required=True)
    pl.add_argument("--logx", action="store_true")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
