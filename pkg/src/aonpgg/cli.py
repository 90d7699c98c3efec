"""Command-line driver: ``aonpgg {run,batch,ratio,graph}``.

Settings are resolved from built-in defaults, then an optional INI config
file (``--config``), then command-line flags. Config file grammar::

    [game]
    alpha = 0.3          # learning rate
    m = 4                # reward exponent, F(y) = y**(1/m)
    eps_stop = 1e-4      # corner width for convergence
    T = 10000000         # maximum rounds

    [graph]
    kind = rgg           # rgg | circulant | file
    n = 50
    r_g = 0.15
    l = 4
    path = graph.txt
    max_attempts = 1000000

    [batch]
    n_runs = 500
    master_seed = 0
    parallelism = 1
    record_stride = 0

    [output]
    directory = results

Results go to ``<directory>/<command>-<hash>/`` where ``<hash>`` identifies
the resolved settings (worker count excluded: it does not change results). The output root defaults to ``$AONPGG_OUTPUT_ROOT`` or
``./results``.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import outputs
from .engine import SimConfig
from .graphs import (
    GraphGenerationError,
    circulant,
    compute_metrics,
    connected_random_geometric,
    save_edge_list,
    save_positions,
)
from .rng import Stream
from .stats import (
    BatchSpec,
    GraphSource,
    RunFailed,
    catastrophe_ratio,
    log_grid,
    outcome_table,
    run_batch,
    tail_probability,
)

ENV_OUTPUT_ROOT = "AONPGG_OUTPUT_ROOT"

# (section, key, type, default, help)
SETTINGS = [
    ("game", "alpha", float, 0.3, "learning rate"),
    ("game", "m", float, 4.0, "reward exponent, F(y) = y^(1/m)"),
    ("game", "eps_stop", float, 1e-4, "convergence corner width"),
    ("game", "T", int, 10**7, "maximum number of rounds"),
    ("graph", "kind", str, "rgg", "graph family: rgg, circulant or file"),
    ("graph", "n", int, 50, "number of agents"),
    ("graph", "r_g", float, 0.15, "connection radius of random geometric graphs"),
    ("graph", "l", int, None, "neighbors per vertex of circulant graphs (even)"),
    ("graph", "path", str, None, "edge-list file for kind=file"),
    ("graph", "max_attempts", int, 1_000_000, "connected-graph rejection sampling limit"),
    ("batch", "n_runs", int, 500, "number of runs"),
    ("batch", "master_seed", int, 0, "master seed for per-run streams"),
    ("batch", "parallelism", int, 1, "worker threads"),
    ("batch", "record_stride", int, 0, "record total belief every this many rounds (0 = off)"),
    ("output", "directory", str, None, f"output root (default ${ENV_OUTPUT_ROOT} or ./results)"),
]
FLAGS = {
    "alpha": "--alpha", "m": "--m", "eps_stop": "--eps-stop", "T": "--T",
    "kind": "--graph", "n": "--n", "r_g": "--r-g", "l": "--l", "path": "--path",
    "max_attempts": "--max-attempts", "n_runs": "--runs", "master_seed": "--seed",
    "parallelism": "--parallelism", "record_stride": "--record-stride", "directory": "--out",
}


class ConfigError(ValueError):
    pass


@dataclass
class Settings:
    values: dict

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None

    def sim_config(self) -> SimConfig:
        return SimConfig(
            alpha=self.alpha, m=self.m, eps_stop=self.eps_stop,
            max_rounds=self.T, record_stride=self.record_stride,
        )

    def source(self) -> GraphSource:
        return GraphSource(
            kind=self.kind, n=self.n, r_g=self.r_g if self.kind == "rgg" else None,
            l=self.l if self.kind == "circulant" else None,
            path=self.path if self.kind == "file" else None,
            max_attempts=self.max_attempts,
        )

    def digest(self, command: str) -> str:
        keep = {k: v for k, v in self.values.items() if k not in ("directory", "parallelism")}
        blob = json.dumps({"command": command, **keep}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _convert(kind, raw, key):
    try:
        if kind is int:
            # accept 1e6-style counts
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {raw!r}") from None


def resolve_settings(args) -> Settings:
    values = {key: default for _, key, _, default, _ in SETTINGS}
    if getattr(args, "config", None):
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        parser.optionxform = str
        if not parser.read(args.config):
            raise ConfigError(f"cannot read config file {args.config}")
        known = {(s, k): t for s, k, t, _, _ in SETTINGS}
        for section in parser.sections():
            for key, raw in parser.items(section):
                if (section, key) not in known:
                    raise ConfigError(f"unknown config key [{section}] {key}")
                values[key] = _convert(known[(section, key)], raw, f"[{section}] {key}")
    for key in values:
        given = getattr(args, key, None)
        if given is not None:
            values[key] = given
    return Settings(values)


def _check(settings: Settings, command: str):
    if settings.l is not None and settings.l % 2:
        raise ConfigError(f"l must be even, got {settings.l}")
    try:
        source = settings.source()
        cfg = settings.sim_config()
        if command == "batch" and settings.n_runs < 1:
            raise ValueError(f"n_runs must be at least 1, got {settings.n_runs}")
        spec = BatchSpec(
            source=source, n_runs=1 if command == "run" else settings.n_runs, cfg=cfg,
            master_seed=settings.master_seed, parallelism=settings.parallelism,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return spec


def _output_dir(settings: Settings, command: str) -> Path:
    root = settings.directory or os.environ.get(ENV_OUTPUT_ROOT) or "results"
    out = Path(root) / f"{command}-{settings.digest(command)}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_config(settings: Settings, path: Path):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    for section, key, _, _, _ in SETTINGS:
        if section == "output" or settings.values[key] is None:
            continue
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, str(settings.values[key]))
    with open(path, "w") as f:
        parser.write(f)


def _simulate(args, command: str) -> int:
    settings = resolve_settings(args)
    spec = _check(settings, command)
    out = _output_dir(settings, command)
    batch = run_batch(spec)
    outputs.write_runs(out / "runs.csv", batch.records)
    if spec.cfg.record_stride:
        for rec, res in zip(batch.records, batch.runs):
            outputs.write_series(out / f"series_{rec.run_id}.csv", res.series)
    _write_config(settings, out / "config.ini")
    if command == "run":
        rec = batch.records[0]
        tau = "-" if rec.tau is None else rec.tau
        print(f"converged={rec.converged.value} tau={tau} "
              f"final_mean_belief={rec.final_mean_belief:.6f}")
    else:
        outputs.write_tail(out / "tail.csv", tail_probability(batch.taus, log_grid(spec.cfg.max_rounds)))
        print(outcome_table(batch))
    print(f"wrote {out}")
    return 0


def cmd_run(args) -> int:
    return _simulate(args, "run")


def cmd_batch(args) -> int:
    return _simulate(args, "batch")


def cmd_ratio(args) -> int:
    path = Path(args.runs_csv)
    if not path.is_file():
        raise ConfigError(f"{path}: no such file")
    try:
        records = outputs.read_runs(path)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    horizons = {r.T for r in records}
    if len(horizons) > 1:
        raise ConfigError(f"{path}: runs have different horizons T {sorted(horizons)}")
    horizon = horizons.pop() if horizons else None
    try:
        est = catastrophe_ratio(
            [r.tau for r in records], args.t, args.pairs,
            with_replacement=args.replacement, rng=Stream(args.seed), horizon=horizon,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = Path(args.out) if args.out else path.with_name("ratio.csv")
    outputs.write_ratio(out, [est])
    with open(out.with_suffix(".meta"), "w") as f:
        f.write(f"source = {path}\nhorizon = {horizon}\n"
                "censoring = timed-out runs counted as tau = T + 1\n"
                f"count_max = {est.count_max}\ncount_sum = {est.count_sum}\n")
    ratio = "-" if est.ratio is None else f"{est.ratio:.4f}"
    print(f"p_max={est.p_max:.4f} p_sum={est.p_sum:.4f} ratio={ratio} "
          f"({est.count_max}:{est.count_sum} of {est.n_pairs} pairs; "
          f"timed-out runs counted as T+1={horizon + 1 if horizon else '-'})")
    print(f"wrote {out}")
    return 0


def cmd_graph(args) -> int:
    if args.kind == "circulant":
        if args.l is None:
            raise ConfigError("circulant graphs need --l")
        try:
            g = circulant(args.n, args.l)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        if not 0.0 < args.r_g < 1.0:
            raise ConfigError(f"r_g must lie in (0, 1), got {args.r_g}")
        g = connected_random_geometric(args.n, args.r_g, Stream(args.seed), args.max_attempts)
    m = compute_metrics(g)
    degrees = sorted(set(g.degrees.tolist()))
    print(f"n={g.n} edges={m.edge_count} mean_degree={m.mean_degree:.4f} "
          f"max_degree={m.max_degree} degrees={degrees} triangles={m.triangle_count} "
          f"connected={m.connected}" + (f" attempts={g.attempts}" if g.attempts else ""))
    if args.out:
        save_edge_list(g, args.out)
        if g.positions is not None:
            save_positions(g, f"{args.out}.pos")
        print(f"wrote {args.out}")
    return 0


def _add_settings(p: argparse.ArgumentParser, skip=()):
    p.add_argument("--config", help="INI config file; flags override its values")
    for _, key, kind, default, text in SETTINGS:
        if key in skip:
            continue
        shown = "" if default is None else f" (default: {default})"
        flag_kind = (lambda s, _k=key: _convert(int, s, _k)) if kind is int else kind
        p.add_argument(FLAGS[key], dest=key, type=flag_kind, default=None, help=text + shown,
                       **({"choices": ("rgg", "circulant", "file")} if key == "kind" else {}))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aonpgg",
        description="All-or-nothing public goods game with moving-average learners on networks. "
        "Defaults: alpha=0.3, N=50, F(x)=x^(1/4), eps_s=1e-4, T=1e7, 500 runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single run; writes runs.csv (+ series)")
    _add_settings(p, skip=("n_runs", "parallelism"))
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", help="many runs; writes runs.csv and tail.csv")
    _add_settings(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("ratio", help="catastrophe ratio from a runs.csv; writes ratio.csv")
    p.add_argument("runs_csv")
    p.add_argument("--t", type=float, default=1e6, help="threshold (default: 1e6)")
    p.add_argument("--pairs", type=int, default=250, help="number of pairs (default: 250)")
    p.add_argument("--replacement", action="store_true", help="resample pairs with replacement")
    p.add_argument("--seed", type=int, default=0, help="seed for resampling (default: 0)")
    p.add_argument("--out", help="output file (default: ratio.csv next to runs.csv)")
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("graph", help="generate a graph, print its metrics, optionally save it")
    p.add_argument("kind", choices=("rgg", "circulant"))
    p.add_argument("--n", type=int, default=50, help="number of vertices (default: 50)")
    p.add_argument("--r-g", dest="r_g", type=float, default=0.15, help="radius (default: 0.15)")
    p.add_argument("--l", type=int, help="neighbors per vertex, even")
    p.add_argument("--seed", type=int, default=0, help="seed (default: 0)")
    p.add_argument("--max-attempts", dest="max_attempts", type=int, default=1_000_000,
                   help="rejection sampling limit (default: 1000000)")
    p.add_argument("--out", help="edge-list file; positions go to <out>.pos")
    p.set_defaults(func=cmd_graph)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"aonpgg {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (GraphGenerationError, RunFailed) as exc:
        print(f"aonpgg {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"aonpgg {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
