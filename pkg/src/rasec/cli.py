"""Command-line entry point: ``rasec {run,table2,table3,fig4,fig2,heatmap}``.

Exit codes: 0 ok, 2 config error, 3 numerical error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import shutil
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, load_experiment, preset_path
from .domain import AcquisitionDomain, phantom_from_dict, write_grid_csv
from .errors import ConfigError, NumericalError, RasecError
from .kernels import KernelSpec, export_covariance_contour
from .runner import METRICS, mean_trajectory, run_benchmark, run_energy_ablation

log = logging.getLogger("rasec")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


class Staging:
    """Collect outputs in a scratch directory; publish them only on success."""

    def __init__(self, out: Path):
        self.out = out
        self.dir = None

    def __enter__(self) -> Path:
        parent = self.out.parent if self.out.parent.exists() else Path(tempfile.gettempdir())
        self.dir = Path(tempfile.mkdtemp(prefix=".rasec-", dir=parent))
        return self.dir

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                self.out.mkdir(parents=True, exist_ok=True)
                for item in sorted(self.dir.iterdir()):
                    dest = self.out / item.name
                    if dest.is_dir():
                        shutil.rmtree(dest)
                    shutil.move(str(item), str(dest))
        finally:
            shutil.rmtree(self.dir, ignore_errors=True)
        return False


def _apply_overrides(exp: ExperimentConfig, args) -> ExperimentConfig:
    if getattr(args, "seed", None) is not None:
        exp.master_seed = args.seed
    if getattr(args, "repeats", None) is not None:
        if args.repeats < 1:
            raise ConfigError("--repeats must be at least 1")
        exp.repeats = args.repeats
    return exp


RESULT_COLUMNS = ["config", "kernel", "strategy", "trial", "seed", *METRICS, "n_points"]
AGG_COLUMNS = ["config", "kernel", "strategy", "n_trials"] + [
    f"{m}_{s}" for m in METRICS for s in ("mean", "std")]


def _benchmark(exp: ExperimentConfig, stage: Path, threads: int, dump_trials: bool):
    aggs, records = run_benchmark(exp.named_configs(), exp.repeats, exp.master_seed, threads)
    arms = {a.name: a for a in exp.arms}
    rows = []
    for rec in records:
        if rec.result is None:
            continue
        row = rec.row()
        row.update(kernel=arms[rec.config].kernel_name, strategy=arms[rec.config].strategy_name)
        rows.append(row)
    write_csv(stage / "results.csv", rows, RESULT_COLUMNS)
    agg_rows = []
    for agg in aggs:
        row = agg.row()
        row.update(kernel=arms[agg.config].kernel_name, strategy=arms[agg.config].strategy_name)
        agg_rows.append(row)
    write_csv(stage / "aggregates.csv", agg_rows, AGG_COLUMNS)
    if dump_trials:
        tdir = stage / "trials"
        tdir.mkdir()
        for i, rec in enumerate(records):
            if rec.result is not None:
                fname = f"{i:04d}_{rec.config.replace('/', '_')}_t{rec.trial:02d}.json"
                (tdir / fname).write_text(rec.result.to_json(exp.phantom_cfg), encoding="utf-8")
    failed = [a for a in aggs if a.error]
    for a in failed:
        print(f"error: {a.error}", file=sys.stderr)
    return aggs, records, failed


def _manifest(stage: Path, exp: ExperimentConfig, config_path: Path, started: float, args):
    outputs = sorted(str(p.relative_to(stage)) for p in stage.rglob("*") if p.is_file())
    manifest = {
        "tool": "rasec",
        "version": __version__,
        "config": str(config_path),
        "config_sha256": exp.digest,
        "master_seed": exp.master_seed,
        "repeats": exp.repeats,
        "threads": getattr(args, "threads", 1),
        "outputs": outputs,
        "wall_clock_s": round(time.time() - started, 3),
    }
    (stage / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _print_table(title: str, header: list[str], rows: list[list]) -> str:
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) for i, h in enumerate(header)]
    lines = [title, "  ".join(str(h).ljust(w) for h, w in zip(header, widths))]
    for r in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(r, widths)))
    text = "\n".join(lines) + "\n"
    print(text, end="")
    return text


def cmd_run(args) -> int:
    started = time.time()
    exp = _apply_overrides(load_experiment(args.config), args)
    with Staging(Path(args.out)) as stage:
        _, _, failed = _benchmark(exp, stage, args.threads, args.dump_trials)
        _manifest(stage, exp, Path(args.config), started, args)
    return EXIT_NUMERICAL if failed else EXIT_OK


def _preset(args, name):
    path = Path(args.config) if args.config else preset_path(name)
    return path, _apply_overrides(load_experiment(path), args)


def cmd_table(args, name: str, label_key: str, title: str) -> int:
    started = time.time()
    path, exp = _preset(args, name)
    with Staging(Path(args.out)) as stage:
        aggs, _, failed = _benchmark(exp, stage, args.threads, args.dump_trials)
        arms = {a.name: a for a in exp.arms}
        rows, csv_rows = [], []
        for agg in aggs:
            label = getattr(arms[agg.config], label_key)
            if agg.error:
                rows.append([label, "failed"] + [""] * (1 if name == "table2" else 2))
                continue
            m = agg.mean
            if name == "table2":
                rows.append([label, exp.iterations, f"{m['f1']:.3f}"])
                csv_rows.append({"kernel": label, "iterations": exp.iterations, "f1": m["f1"]})
            else:
                rows.append([label, f"{m['precision']:.3f}", f"{m['recall']:.3f}",
                             f"{m['f1']:.3f}"])
                csv_rows.append({"strategy": label, "precision": m["precision"],
                                 "recall": m["recall"], "f1": m["f1"]})
        if name == "table2":
            header = ["Kernel", "Iterations", "F1"]
            write_csv(stage / "table2.csv", csv_rows, ["kernel", "iterations", "f1"])
        else:
            header = ["Strategy", "Precision", "Recall", "F1"]
            write_csv(stage / "table3.csv", csv_rows, ["strategy", "precision", "recall", "f1"])
        text = _print_table(title, header, rows)
        (stage / f"{name}.txt").write_text(text, encoding="utf-8")
        _manifest(stage, exp, path, started, args)
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_fig4(args) -> int:
    started = time.time()
    path, exp = _preset(args, "fig4")
    base = exp.arms[0].config
    with Staging(Path(args.out)) as stage:
        aggs, records = run_energy_ablation(base, exp.repeats, exp.master_seed,
                                            exp.ablation_weight, args.threads)
        failed = [a for a in aggs if a.error]
        cols = ["iteration", "precision", "recall", "f1", "dist_cum", "rot_cum"]
        rows = []
        for agg in aggs:
            mine = [r for r in records if r.config == agg.config]
            write_csv(stage / f"curve_{agg.config}.csv", mean_trajectory(mine), cols)
            row = agg.row()
            row.update(kernel=exp.arms[0].kernel_name, strategy=agg.config)
            rows.append(row)
        write_csv(stage / "aggregates.csv", rows, AGG_COLUMNS)
        result_rows = []
        for rec in records:
            if rec.result is not None:
                row = rec.row()
                row.update(kernel=exp.arms[0].kernel_name, strategy=rec.config)
                result_rows.append(row)
        write_csv(stage / "results.csv", result_rows, RESULT_COLUMNS)
        if not failed:
            c, u = aggs[0].mean, aggs[1].mean
            table = [[a.config, f"{a.mean['f1']:.3f}", f"{a.mean['distance']:.1f}",
                      f"{a.mean['rotation']:.3f}"] for a in aggs]
            text = _print_table("RASEC energy ablation", ["Arm", "F1", "Distance mm",
                                                          "Rotation rad"], table)
            text += (f"distance reduction {1 - c['distance'] / u['distance']:.1%}, "
                     f"rotation reduction {1 - c['rotation'] / u['rotation']:.1%}\n")
            print(text.splitlines()[-1])
            (stage / "fig4.txt").write_text(text, encoding="utf-8")
        _manifest(stage, exp, path, started, args)
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_fig2(args) -> int:
    domain = AcquisitionDomain(float(args.half_extent), float(args.step))
    specs = {
        "SE": KernelSpec("SE", l=4.0),
        "TP": KernelSpec("TP"),
        "OU": KernelSpec("OU", l=4.0),
        "SE-OU": KernelSpec("SE_OU", l1=4.0, l2=3.5, alpha=args.alpha, beta=args.beta),
    }
    with Staging(Path(args.out)) as stage:
        for name, spec in specs.items():
            export_covariance_contour(spec, domain, stage / f"covariance_{name}.csv")
    return EXIT_OK


def cmd_heatmap(args) -> int:
    src = Path(args.trial)
    try:
        payload = json.loads(src.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise OSError(f"trial result not found: {src}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not a trial result file: {exc}") from exc
    if "phantom" not in payload:
        raise ConfigError("trial result lacks its phantom definition")
    phantom, _ = phantom_from_dict(payload["phantom"])
    domain = phantom.domain
    with Staging(Path(args.out)) as stage:
        write_grid_csv(stage / "mean.csv", domain, payload["final_mean"])
        write_grid_csv(stage / "std.csv", domain, payload["final_std"])
        write_grid_csv(stage / "truth.csv", domain, phantom.grid_values())
        pts = [{"x": p[0], "y": p[1], "value": v}
               for p, v in zip(payload["points"], payload["values"])]
        write_csv(stage / "points.csv", pts, ["x", "y", "value"])
    return EXIT_OK


def _common(p, preset: bool):
    if preset:
        p.add_argument("--config", help="override the bundled preset config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--repeats", type=int, help="trials per config (overrides config)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker processes for independent trials (1 = single process)")
    p.add_argument("--dump-trials", action="store_true",
                   help="write one JSON file per trial for `rasec heatmap`")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rasec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rasec {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", required=True)
    _common(p, preset=False)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("table2", help="RASEC F1 under each kernel")
    _common(p, preset=True)
    p.set_defaults(func=lambda a: cmd_table(a, "table2", "kernel_name",
                                            "RASEC F1 by kernel function"))

    p = sub.add_parser("table3", help="precision/recall/F1 by acquisition strategy")
    _common(p, preset=True)
    p.set_defaults(func=lambda a: cmd_table(a, "table3", "strategy_name",
                                            "Performance by acquisition strategy"))

    p = sub.add_parser("fig4", help="RASEC energy-term ablation curves")
    _common(p, preset=True)
    p.set_defaults(func=cmd_fig4)

    p = sub.add_parser("fig2", help="export covariance matrices along a line for contour plots")
    p.add_argument("--out", required=True)
    p.add_argument("--half-extent", type=float, default=25.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.75)
    p.add_argument("--beta", type=float, default=0.25)
    p.set_defaults(func=cmd_fig2)

    p = sub.add_parser("heatmap", help="posterior mean/std and ground-truth grids from a trial dump")
    p.add_argument("trial", help="trial JSON written by --dump-trials")
    p.add_argument("out", help="output directory")
    p.set_defaults(func=cmd_heatmap)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RasecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
