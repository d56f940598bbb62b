"""Command-line driver: ``graphcv synth``, ``graphcv sensor``, ``graphcv graph-info``.

Every run prints (or writes) a sweep table as CSV with ``#`` metadata lines
holding everything needed to repeat it. Options may also come from a
``key = value`` config file given with ``--config``; flags win.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from pathlib import Path

import numpy as np

from graphcv import __version__
from graphcv.builders import KnnGraphConfig, random_regular
from graphcv.crossval import sweep
from graphcv.errors import GraphCVError, IngestError, InfeasibleError, NumericalError
from graphcv.graph import read_edge_list, spectral_decompose, write_edge_list
from graphcv.ingest import parse_station_csv, to_experiment
from graphcv.sampling import STRATEGIES, make_folds, select_known_set
from graphcv.signals import BandlimitedSpec, synth_bandlimited, write_signal_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INGEST = 3
EXIT_NUMERICAL = 4


class UsageError(GraphCVError):
    pass


def parse_sweep(text):
    """``start:stop:step`` (stop included when on the grid) or a comma list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError
            values = list(range(start, stop + 1, step))
        else:
            values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid sweep {text!r}; use start:stop:step or a comma list") from None
    if not values or any(b <= a for a, b in zip(values, values[1:])) or values[0] < 1:
        raise argparse.ArgumentTypeError(f"sweep {text!r} must be positive and strictly increasing")
    return values


def read_config(path):
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def derive_seeds(seed, count=4):
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


def _common(p):
    p.add_argument("--config", help="key = value file supplying option defaults")
    p.add_argument("--seed", type=int, default=None, help="base seed (required with --ci)")
    p.add_argument("--ci", action="store_true", default=bool(os.environ.get("CI")), help="require an explicit --seed")
    p.add_argument("--out", "-o", help="output CSV path (default: stdout)")
    p.add_argument("--artifacts", help="directory for graph, signal and fold-plan files")


def _experiment(p, samples, sweep_default):
    p.add_argument("--samples", type=int, default=samples, help="size of the known set S")
    p.add_argument("--strategy", choices=STRATEGIES, default="greedy-dopt")
    p.add_argument("--r-ref", type=int, default=None, help="reference bandwidth for greedy-dopt (default samples/2)")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repeats", type=int, default=50)
    p.add_argument("--sweep", type=parse_sweep, default=parse_sweep(sweep_default))
    p.add_argument("--clip", type=float, default=1.0, help="singular value clip threshold")


def build_parser():
    parser = argparse.ArgumentParser(prog="graphcv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"graphcv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="random regular graph with a noisy bandlimited signal")
    _common(p)
    p.add_argument("--n", type=int, default=1000, help="vertex count")
    p.add_argument("--degree", type=int, default=6)
    p.add_argument("--bw", type=int, default=20, help="true signal bandwidth")
    p.add_argument("--signal-power", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.1, help="noise power (mean square per vertex)")
    _experiment(p, 200, "10:110:10")

    p = sub.add_parser("sensor", help="k-NN sensor graph from a station CSV")
    _common(p)
    p.add_argument("stations", help="CSV with columns id,lat,lon,elev_m,<value column>")
    p.add_argument("--value-column", default="value")
    p.add_argument("--k-neighbors", type=int, default=5)
    p.add_argument("--sigma", type=float, default=50.0, help="kernel width in km")
    _experiment(p, 200, "10:110:10")

    p = sub.add_parser("graph-info", help="summary of a graph")
    p.add_argument("--config", help=argparse.SUPPRESS)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--edges", help="edge-list file")
    src.add_argument("--stations", help="station CSV (k-NN graph)")
    src.add_argument("--random-regular", action="store_true")
    p.add_argument("--value-column", default="value")
    p.add_argument("--k-neighbors", type=int, default=5)
    p.add_argument("--sigma", type=float, default=50.0)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--degree", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"{args.config}: unknown keys {', '.join(unknown)}")
        typed = {}
        for action in sub._actions:
            if action.dest in cfg:
                value = cfg[action.dest]
                if action.type is not None:
                    value = action.type(value)
                elif isinstance(action.default, bool):
                    value = value.lower() in ("1", "true", "yes", "on")
                typed[action.dest] = value
        sub.set_defaults(**typed)
        args = parser.parse_args(argv)
    if getattr(args, "ci", False) and args.seed is None:
        raise UsageError("--seed is required in CI mode")
    if getattr(args, "seed", None) is None:
        args.seed = 0
    return args


def _run_sweep(args, basis, signal, graph, seeds, meta):
    S = select_known_set(basis, args.samples, args.strategy, seeds[2], r_ref=args.r_ref)
    plan = make_folds(S, args.folds, args.repeats, seeds[3])
    meta.update({
        "strategy": args.strategy,
        "sampling_seed": seeds[2],
        "fold_seed": seeds[3],
        "graph_hash": graph.content_hash(),
    })
    result = sweep(
        basis, S, signal.values[S], args.sweep, plan,
        ground_truth=signal.values, clip=args.clip, metadata=meta,
    )
    if args.artifacts:
        out = Path(args.artifacts)
        out.mkdir(parents=True, exist_ok=True)
        write_edge_list(graph, out / "graph.txt")
        write_signal_csv(signal.with_known(S), out / "signal.csv")
        (out / "folds.csv").write_text(plan.to_csv(), encoding="utf-8")
    return result


def _flags(args):
    skip = {"config", "out", "artifacts", "ci"}
    items = []
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(value, list):
            value = ",".join(map(str, value))
        items.append(f"{key}={value}")
    return " ".join(items)


def cmd_synth(args):
    seeds = derive_seeds(args.seed)
    graph = random_regular(args.n, args.degree, seeds[0])
    basis = spectral_decompose(graph)
    signal = synth_bandlimited(basis, BandlimitedSpec(args.bw, args.signal_power, args.noise, seeds[1]))
    meta = {
        "graphcv": __version__,
        "command": "synth",
        "flags": _flags(args),
        "graph_seed": seeds[0],
        "signal_seed": seeds[1],
    }
    return _run_sweep(args, basis, signal, graph, seeds, meta)


def _load_stations(path, value_column):
    path = Path(path)
    if not path.is_file():
        raise IngestError("station file not found", path)
    return parse_station_csv(path, value_column)


def cmd_sensor(args):
    seeds = derive_seeds(args.seed)
    table = _load_stations(args.stations, args.value_column)
    exp = to_experiment(table, KnnGraphConfig(args.k_neighbors, args.sigma))
    basis = spectral_decompose(exp.graph)
    meta = {
        "graphcv": __version__,
        "command": "sensor",
        "flags": _flags(args),
        "input_sha256": hashlib.sha256(Path(args.stations).read_bytes()).hexdigest(),
        "stations_kept": len(exp.station_ids),
        "stations_dropped": len(table) - len(exp.station_ids),
    }
    return _run_sweep(args, basis, exp.signal, exp.graph, seeds, meta)


def cmd_graph_info(args):
    if args.edges:
        path = Path(args.edges)
        if not path.is_file():
            raise IngestError("edge-list file not found", path)
        graph = read_edge_list(path)
    elif args.stations:
        table = _load_stations(args.stations, args.value_column)
        graph = to_experiment(table, KnnGraphConfig(args.k_neighbors, args.sigma)).graph
    else:
        graph = random_regular(args.n, args.degree, derive_seeds(args.seed)[0])
    basis = spectral_decompose(graph)
    deg = graph.degrees()
    vals = basis.values
    lines = [
        f"vertices: {graph.n}",
        f"edges: {graph.num_edges}",
        f"components: {graph.num_components()}",
        f"zero eigenvalues: {basis.num_zero()}",
        f"degree min/mean/max: {deg.min():.6g} {deg.mean():.6g} {deg.max():.6g}",
        f"lambda_2: {vals[1] if graph.n > 1 else 0.0:.6g}",
        f"lambda_max: {vals[-1]:.6g}",
        f"repeated eigenvalues: {int(np.sum(np.diff(vals) < 1e-9))}",
        f"sha256: {graph.content_hash()}",
    ]
    return "\n".join(lines) + "\n"


COMMANDS = {"synth": cmd_synth, "sensor": cmd_sensor, "graph-info": cmd_graph_info}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        result = COMMANDS[args.command](args)
        text = result if isinstance(result, str) else result.to_csv()
        if getattr(args, "out", None):
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, InfeasibleError) as exc:
        print(f"graphcv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IngestError as exc:
        print(f"graphcv: ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except NumericalError as exc:
        print(f"graphcv: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
