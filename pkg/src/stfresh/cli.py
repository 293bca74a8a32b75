"""Command-line front end.

Every subcommand resolves an experiment configuration from a preset and/or
a JSON file, applies per-parameter flag overrides and writes one CSV (or
JSON) table to ``--out`` or standard output.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

import numpy as np

from . import config as cfgmod
from .belief import avg_conditional_entropy, uncertainty_law
from .errors import ConfigError, TruncationError
from .simulation import run_batch, timeline
from .sweep_optim import SWEEPABLE, SweepSpec, default_k_max, entropy_vs_radius, sweep

log = logging.getLogger("stfresh")

EXIT_USAGE = 2
EXIT_NUMERIC = 3

DEFAULT_PRESETS = {
    "entropy-sweep": "fig3",
    "timeline": "fig2a",
    "cdf": "fig5",
    "optimize": "fig4",
    "simulate": "fig3",
}

# flag -> (section, key)
OVERRIDES = {
    "q": ("source", "q"),
    "eta": ("source", "eta"),
    "alpha": ("spatial", "alpha"),
    "rho": ("spatial", "rho"),
    "ring_width": ("spatial", "ring_width"),
    "k": ("spatial", "num_rings"),
    "zeta": ("channel", "zeta"),
    "epsilon": ("channel", "epsilon"),
}


class UsageError(Exception):
    pass


def fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".9g")


def _jsonable(value):
    if value is None or isinstance(value, (bool, np.bool_)):
        return None if value is None else bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    v = float(value)
    if not math.isfinite(v):
        return None
    return float(format(v, ".9g"))


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render_json(header, rows) -> str:
    table = [{k: _jsonable(v) for k, v in zip(header, row)} for row in rows]
    return json.dumps(table, indent=2) + "\n"


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", metavar="PATH", help="JSON experiment configuration")
    g.add_argument("--preset", choices=sorted(cfgmod.PRESETS), help="built-in parameter set")
    g.add_argument("--seed", type=_u64, help="base seed (unsigned 64-bit)")
    g.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    g.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    g.add_argument("--dump-config", action="store_true", help="print the resolved configuration and exit")
    g.add_argument("-v", "--verbose", action="store_true")
    o = common.add_argument_group("parameter overrides")
    o.add_argument("--q", type=float)
    o.add_argument("--eta", type=float)
    o.add_argument("--alpha", type=float)
    o.add_argument("--zeta", type=float)
    o.add_argument("--epsilon", type=float)
    o.add_argument("--rho", type=float)
    o.add_argument("--ring-width", type=float)
    o.add_argument("--k", type=int, help="number of rings")

    p = argparse.ArgumentParser(prog="stfresh", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("entropy-sweep", parents=[common], help="average uncertainty vs coverage radius")
    s.add_argument("--k-min", type=int)
    s.add_argument("--k-max", type=int)

    s = sub.add_parser("timeline", parents=[common], help="per-slot uncertainty trace of one run")
    s.add_argument("--slots", type=int)

    s = sub.add_parser("cdf", parents=[common], help="distribution of the receiver's uncertainty")
    s.add_argument("--radii", type=_float_list, help="coverage radii in meters, comma separated")
    s.add_argument("--alphas", type=_float_list, help="reliability exponents, comma separated")
    s.add_argument("--points", type=int, help="number of thresholds on [0, 1] bit")

    s = sub.add_parser("optimize", parents=[common], help="optimal coverage radius across a parameter grid")
    s.add_argument("--param", choices=SWEEPABLE)
    s.add_argument("--grid", type=_float_list)
    s.add_argument("--k-max", type=int)

    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo validation against the analysis")
    s.add_argument("--runs", type=int, help="number of independent topologies")
    s.add_argument("--slots", type=int)
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    return p


def resolve_config(args) -> cfgmod.ExperimentConfig:
    data: dict = {}
    if args.preset or not args.config:
        data = cfgmod.preset(args.preset or DEFAULT_PRESETS[args.command])
    if args.config:
        try:
            with open(args.config) as fh:
                file_data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {args.config}: {exc}") from None
        if not isinstance(file_data, dict):
            raise ConfigError("configuration must be a JSON object")
        data = cfgmod.merge(data, file_data)
    over: dict = {}
    for flag, (section, key) in OVERRIDES.items():
        v = getattr(args, flag)
        if v is not None:
            over.setdefault(section, {})[key] = v
    if args.seed is not None:
        over.setdefault("sim", {})["base_seed"] = args.seed
    if args.out is not None:
        over.setdefault("output", {})["path"] = args.out
    if args.json:
        over.setdefault("output", {})["format"] = "json"

    cmd = args.command
    if cmd == "entropy-sweep":
        if args.k_min is not None:
            over.setdefault("sweep", {})["k_min"] = args.k_min
        if args.k_max is not None:
            over.setdefault("sweep", {})["k_max"] = args.k_max
    elif cmd in ("timeline", "simulate"):
        if args.slots is not None:
            if args.slots < 1:
                raise UsageError("--slots must be positive")
            over.setdefault("sim", {})["slots"] = args.slots
        if cmd == "simulate" and args.runs is not None:
            if args.runs < 1:
                raise UsageError("--runs must be at least 1")
            over.setdefault("sim", {})["topologies"] = args.runs
    elif cmd == "cdf":
        sw = over.setdefault("sweep", {})
        if args.radii is not None:
            sw["radii"] = args.radii
        if args.alphas is not None:
            sw["alphas"] = args.alphas
        if args.points is not None:
            sw["cdf_points"] = args.points
    elif cmd == "optimize":
        sw = over.setdefault("sweep", {})
        if args.param is not None:
            sw["param"] = args.param
        if args.grid is not None:
            sw["grid"] = args.grid
        if args.k_max is not None:
            sw["k_max"] = args.k_max
    return cfgmod.from_dict(cfgmod.merge(data, over))


def cmd_entropy_sweep(cfg: cfgmod.ExperimentConfig):
    k_min = cfg.sweep.k_min
    k_max = cfg.sweep.k_max if cfg.sweep.k_max is not None else default_k_max(cfg)
    ks = range(k_min, k_max + 1)
    if len(ks) == 0:
        raise UsageError(f"empty ring range {k_min}..{k_max}")
    curve = entropy_vs_radius(cfg, ks)
    header = ["K", "R_m", "H_bits", "p_s", "c"]
    return header, [(p.K, p.R_m, p.H, p.p_s, p.c) for p in curve]


def cmd_timeline(cfg: cfgmod.ExperimentConfig):
    pts = timeline(cfg, cfg.sim.base_seed, cfg.sim.slots)
    step = cfg.sim.trace_decimation
    header = ["slot", "h_bits", "y", "delta", "reception"]
    return header, [tuple(p) for p in pts[::step]]


def _rings_for_radius(cfg: cfgmod.ExperimentConfig, radius: float) -> int:
    k = radius / cfg.spatial.ring_width
    if k < 1 or abs(k - round(k)) > 1e-9:
        raise ConfigError(
            f"radius {radius} m is not a positive multiple of the ring width {cfg.spatial.ring_width} m"
        )
    return int(round(k))


def cmd_cdf(cfg: cfgmod.ExperimentConfig):
    radii = cfg.sweep.radii or (cfg.spatial.radius,)
    alphas = cfg.sweep.alphas or (cfg.spatial.alpha,)
    w = np.linspace(0.0, 1.0, cfg.sweep.cdf_points)
    rows = []
    for alpha in alphas:
        for radius in radii:
            c = cfgmod.from_dict(cfgmod.merge(cfg.to_dict(), {"spatial": {
                "alpha": alpha, "num_rings": _rings_for_radius(cfg, radius)}}))
            law = uncertainty_law(c.source, c.spatial, c.channel_config())
            for wi, fi in zip(w, law.cdf(w)):
                rows.append((alpha, c.spatial.radius, wi, fi))
    return ["alpha", "R_m", "w_bits", "cdf"], rows


def cmd_optimize(cfg: cfgmod.ExperimentConfig):
    spec = SweepSpec(cfg.sweep.param, cfg.sweep.grid, cfg, cfg.sweep.k_max)
    table = sweep(spec)
    for name, ok in table.diagnostics.items():
        log.info("%s: %s", name, ok)
    header = ["sweep_value", "K_star", "R_m_star", "H_star", "R_aoi"]
    rows = [(r.value, r.K_star, r.R_m_star, r.H_star, r.R_aoi) for r in table.rows]
    if cfg.output.format == "json":
        header = header + ["R_aoi_printed"]
        rows = [row + (r.R_aoi_printed,) for row, r in zip(rows, table.rows)]
    return header, rows


def cmd_simulate(cfg: cfgmod.ExperimentConfig, jobs: int = 1):
    batch = run_batch(cfg, jobs=jobs)
    analytic = avg_conditional_entropy(cfg.source, cfg.spatial, cfg.channel_config())
    rel_err = abs(batch.mean - analytic) / analytic if analytic > 0 else math.nan
    header = ["run", "seed", "time_avg_h", "empirical_ps", "aoi_mean"]
    rows = [(i, r.seed, r.time_avg_h, r.empirical_ps, r.empirical_aoi_mean)
            for i, r in enumerate(batch.runs)]
    summary = (["mean", "stderr", "analytic_H", "rel_err"],
               (batch.mean, batch.stderr, analytic, rel_err))
    return header, rows, summary


def execute(args) -> tuple[str, str | None]:
    """Run the selected subcommand; return the rendered output and its destination."""
    cfg = resolve_config(args)
    if args.dump_config:
        return cfg.to_json() + "\n", args.out
    return _render(args, cfg), cfg.output.path


def _render(args, cfg: cfgmod.ExperimentConfig) -> str:
    summary = None
    if args.command == "entropy-sweep":
        header, rows = cmd_entropy_sweep(cfg)
    elif args.command == "timeline":
        header, rows = cmd_timeline(cfg)
    elif args.command == "cdf":
        header, rows = cmd_cdf(cfg)
    elif args.command == "optimize":
        header, rows = cmd_optimize(cfg)
    else:
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        header, rows, summary = cmd_simulate(cfg, args.jobs)

    if cfg.output.format == "json":
        if summary is None:
            return render_json(header, rows)
        doc = {
            "runs": json.loads(render_json(header, rows)),
            "summary": json.loads(render_json(summary[0], [summary[1]]))[0],
        }
        return json.dumps(doc, indent=2) + "\n"
    text = render_csv(header, rows)
    if summary is not None:
        text += render_csv(summary[0], [summary[1]])
    return text


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text, out = execute(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"stfresh: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TruncationError as exc:
        print(f"stfresh: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError) as exc:
        print(f"stfresh: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
