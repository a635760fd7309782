"""Command-line front end.

    bridgegh study <kind> --config c.json [--out DIR] [--workers K] [--plot] [--overwrite]
    bridgegh gh --a m1.csv --b m2.csv [--exact]
    bridgegh limit-sample --alpha A --eps E --seed S --out FILE [--overwrite]
    bridgegh matrix --config c.json --out FILE [--overwrite]

Exit codes: 0 success, 1 runtime failure (I/O, size caps), 2 config or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from . import gh, harness, limits, walks
from .harness import ConfigError, StudyConfig

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    study: StudyConfig
    out_dir: Path
    overwrite: bool = False
    workers: int = 1
    plot: bool = False


def load_study_config(path, study: Optional[str] = None) -> StudyConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a single JSON object")
    if study is not None:
        if data.get("study", study) != study:
            raise ConfigError(f"{path}: config is for study {data['study']!r}, not {study!r}")
        data["study"] = study
    return StudyConfig.from_dict(data)


def parse_config(path, out_dir=None, workers: int = 1, plot: bool = False,
                 overwrite: bool = False, study: Optional[str] = None) -> CliConfig:
    config = load_study_config(path, study)
    if workers < 1:
        raise ConfigError("--workers must be >= 1")
    out = Path(out_dir) if out_dir is not None else Path(f"out-{config.study}")
    return CliConfig(config, out, overwrite, workers, plot)


def _guard(path: Path, overwrite: bool) -> None:
    if path.exists() and not overwrite:
        raise UsageError(f"{path} exists; pass --overwrite to replace it")


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def plot_medians(report: harness.ConvergenceReport, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "bridgegh"
    fig, ax = plt.subplots(figsize=(6, 4))
    ds = [d for d, _ in report.config.schedule]
    for stat in report.statistics():
        meds = [report.median(d, n, stat) for d, n in report.config.schedule]
        ax.plot(ds, meds, marker="o", label=stat)
    ax.set_xscale("log")
    ax.set_xlabel("dimension d")
    ax.set_ylabel("median over trials")
    ax.set_title(report.config.study)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_study(args) -> int:
    cfg = parse_config(args.config, args.out, args.workers, args.plot, args.overwrite, args.kind)
    out = cfg.out_dir
    names = ["report.csv", "summary.csv", "resolved_config.json"]
    if out.exists():
        for name in names + ["notes.txt", "medians.svg"]:
            _guard(out / name, cfg.overwrite)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "resolved_config.json", json.dumps(cfg.study.to_dict(), indent=2, sort_keys=True) + "\n")
    report = harness.run_study(cfg.study, workers=cfg.workers)
    _write(out / "report.csv", report.to_csv())
    _write(out / "summary.csv", report.summary_csv())
    if report.notes:
        _write(out / "notes.txt", "\n".join(report.notes) + "\n")
    if cfg.plot:
        plot_medians(report, out / "medians.svg")
    return EXIT_OK


def cmd_gh(args) -> int:
    a = walks.read_matrix_csv(args.a)
    b = walks.read_matrix_csv(args.b)
    report = gh.gh_bounds(a, b, exact=args.exact)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_limit_sample(args) -> int:
    out = Path(args.out)
    _guard(out, args.overwrite)
    try:
        sample = limits.sample_subordinator(args.alpha, args.eps, ("limit-sample",), args.seed)
    except limits.LimitError as exc:
        raise ConfigError(str(exc)) from None
    sample.to_csv(out)
    return EXIT_OK


def cmd_matrix(args) -> int:
    config = load_study_config(args.config)
    out = Path(args.out)
    _guard(out, args.overwrite)
    if config.m > min(n for _, n in config.schedule):
        raise ConfigError(f"m={config.m} exceeds the smallest n in the schedule")
    d, n = config.schedule[0]
    D = harness.scaled_grid_matrix(config, d, n, ("matrix", d, n, 0))
    walks.DistanceMatrix(D).to_csv(out)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bridgegh", description="Bridge random walks in growing dimension.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("study", help="run a Monte Carlo study")
    p.add_argument("kind", choices=harness.STUDIES)
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--plot", action="store_true")
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("gh", help="GH bounds between two distance-matrix CSV files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_gh)

    p = sub.add_parser("limit-sample", help="write a truncated subordinator sample as CSV")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--eps", type=float, default=limits.DEFAULT_EPS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_limit_sample)

    p = sub.add_parser("matrix", help="write the scaled grid distance matrix of one simulated bridge")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_matrix)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (gh.GhSizeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))
