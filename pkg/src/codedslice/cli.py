"""Command-line front end: scenario runs, slicing sweeps, and the
analytic-vs-simulation validation battery.

`run` writes one CSV row per (slicing index, protocol) plus a JSON sidecar
holding the fully resolved configuration, so a row can always be traced
back to the exact parameters that produced it. Identical invocations
produce byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .channel import ConfigError
from .engine import RunAbortError, RunSpec, run_slicing_sweep
from .presets import load_config_file, resolve_config, scenario_names
from .validate import run_validation

CSV_COLUMNS = (
    "scenario", "protocol", "slicing_index", "links_in_slice", "rtt",
    "p_bar", "k", "gamma1", "gamma2", "mean_ppd", "mean_iod", "iod_stddev",
    "goodput", "completion_time", "failures", "packets", "iterations",
    "seed",
)

PROTOCOL_ORDER = ("rlnc", "baseline")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def write_csv(path: Path, rows: list[dict]) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        missing = set(CSV_COLUMNS) - set(row)
        if missing:
            raise ValueError(f"row missing columns {sorted(missing)}")
        lines.append(",".join(_fmt(row[c]) for c in CSV_COLUMNS))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_sidecar(path: Path, metadata: dict) -> None:
    path.write_text(json.dumps(metadata, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _parse_sweep(text: str) -> list[int]:
    try:
        lo, hi = text.split("..", 1)
        indices = list(range(int(lo), int(hi) + 1))
    except ValueError as exc:
        raise ConfigError(f"bad sweep range {text!r}, expected A..B") from exc
    if not indices:
        raise ConfigError(f"empty sweep range {text!r}")
    return indices


def _summary(rows: list[dict]) -> str:
    cols = ("protocol", "slicing_index", "mean_ppd", "mean_iod",
            "iod_stddev", "goodput", "completion_time", "failures")
    widths = {c: max(len(c), 12) for c in cols}
    head = "  ".join(c.rjust(widths[c]) for c in cols)
    body = []
    for row in rows:
        body.append("  ".join(_fmt(row[c])[:widths[c]].rjust(widths[c])
                              for c in cols))
    return "\n".join([head] + body)


def cmd_run(args) -> int:
    file_values = load_config_file(args.config) if args.config else None
    overrides = {
        "fec_rate": args.gamma1, "fb_rate": args.gamma2,
        "packets": args.packets, "iterations": args.iterations,
        "seed": args.seed, "goodput_mode": args.goodput_mode,
    }
    cfg = resolve_config(args.scenario, file_values, overrides)

    if args.sweep:
        indices = _parse_sweep(args.sweep)
    else:
        index = args.slicing_index if args.slicing_index else cfg.n_links
        indices = [index]
    protocols = (list(PROTOCOL_ORDER) if args.protocol == "both"
                 else [args.protocol])

    base = RunSpec(
        protocol=protocols[0], channel_spec=cfg.channel,
        protocol_config=(cfg.rlnc if protocols[0] == "rlnc" else cfg.baseline),
        n_links=cfg.n_links, slicing_index=indices[0],
        n_packets=cfg.packets, iterations=cfg.iterations, seed=cfg.seed,
        goodput_mode=cfg.goodput_mode)
    sweep_rows = run_slicing_sweep(
        base, indices, protocols,
        configs={"rlnc": cfg.rlnc, "baseline": cfg.baseline})

    rows = []
    for sr in sweep_rows:
        m = sr.metrics
        rows.append({
            "scenario": cfg.scenario, "protocol": sr.protocol,
            "slicing_index": sr.slicing_index,
            "links_in_slice": sr.links_in_slice, "rtt": sr.rtt,
            "p_bar": sr.p_bar, "k": cfg.rlnc.generation_size_k,
            "gamma1": cfg.rlnc.fec_rate, "gamma2": cfg.rlnc.fb_rate,
            "mean_ppd": m.mean_ppd, "mean_iod": m.mean_iod,
            "iod_stddev": m.iod_stddev, "goodput": m.goodput,
            "completion_time": m.completion_time, "failures": m.failures,
            "packets": m.packets, "iterations": m.iterations,
            "seed": cfg.seed,
        })

    out = Path(args.out)
    write_csv(out, rows)
    write_sidecar(out.with_suffix(".json"), {
        "version": f"codedslice {__version__}",
        "command": "run",
        "resolved_config": cfg.resolved_dict(),
        "sweep_indices": indices,
        "protocols": protocols,
        "csv_columns": list(CSV_COLUMNS),
        "csv_path": out.name,
    })
    print(_summary(rows))
    print(f"\nwrote {out} and {out.with_suffix('.json')}")
    return 0


def cmd_validate(args) -> int:
    checks = run_validation(packets=args.packets, seed=args.seed)
    for check in checks:
        print(check.line())
    failed = [c for c in checks if not c.passed]
    if args.out:
        Path(args.out).write_text(json.dumps(
            [c.record() for c in checks],
            sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if failed:
        print(f"\n{len(failed)} of {len(checks)} checks failed: "
              + ", ".join(c.name for c in failed))
        return 1
    print(f"\nall {len(checks)} checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codedslice",
        description="Compare block RLNC erasure coding with the 5G HARQ/ARQ "
                    "baseline over sliced erasure links.")
    parser.add_argument("--version", action="version",
                        version=f"codedslice {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate a scenario or sweep")
    run_p.add_argument("--scenario", required=True, choices=scenario_names())
    run_p.add_argument("--protocol", default="both",
                       choices=("rlnc", "baseline", "both"))
    run_p.add_argument("--sweep", metavar="A..B",
                       help="slicing-index sweep, e.g. 1..20")
    run_p.add_argument("--slicing-index", type=int,
                       help="single slicing index (default: all links)")
    run_p.add_argument("--iterations", type=int)
    run_p.add_argument("--packets", type=int)
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--config", help="TOML config file")
    run_p.add_argument("--out", default="codedslice-results.csv")
    run_p.add_argument("--gamma1", type=float, help="RLNC FEC rate")
    run_p.add_argument("--gamma2", type=float, help="RLNC feedback rate")
    run_p.add_argument("--goodput-mode", choices=("busy", "elapsed"))
    run_p.set_defaults(func=cmd_run)

    val_p = sub.add_parser("validate",
                           help="check every closed form against simulation")
    val_p.add_argument("--packets", type=int, default=100_000)
    val_p.add_argument("--seed", type=int, default=42)
    val_p.add_argument("--out", help="optional JSON report path")
    val_p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        parser.error(str(exc))  # exits 2
    except RunAbortError as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
