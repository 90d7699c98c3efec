"""CSV files written for every experiment.

Floats are written with 17 significant digits (exact round trip), empty
fields mean "absent" (no tau for a timed-out run, no ratio when no pair
sum exceeded the threshold).
"""

from __future__ import annotations

import csv
import os
from typing import Iterable

import numpy as np

from .engine import Outcome
from .stats import CatastropheEstimate, RunRecord

RUNS_HEADER = (
    "run_id", "graph_id", "seed", "r_g_or_l", "n", "alpha", "m", "T", "converged",
    "tau", "final_mean_belief", "mean_degree", "triangle_count", "max_degree",
)
TAIL_HEADER = ("t", "survival")
RATIO_HEADER = ("t", "n_pairs", "replacement", "p_max", "p_sum", "ratio")
SERIES_HEADER = ("round", "total_belief")


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, Outcome):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write(path, header, rows: Iterable[Iterable]):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_runs(path: str | os.PathLike, records: Iterable[RunRecord]):
    _write(path, RUNS_HEADER, ([getattr(r, k) for k in RUNS_HEADER] for r in records))


def read_runs(path: str | os.PathLike) -> list[RunRecord]:
    def num(s, kind):
        return None if s == "" else kind(s)

    def param(s):
        if s == "":
            return None
        return int(s) if s.isdigit() else float(s)

    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != RUNS_HEADER:
            raise ValueError(f"{path}: not a runs.csv file (unexpected header)")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(RUNS_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(RUNS_HEADER)} fields")
            d = dict(zip(RUNS_HEADER, row))
            try:
                out.append(
                    RunRecord(
                        run_id=int(d["run_id"]),
                        graph_id=d["graph_id"],
                        seed=int(d["seed"]),
                        r_g_or_l=param(d["r_g_or_l"]),
                        n=int(d["n"]),
                        alpha=float(d["alpha"]),
                        m=float(d["m"]),
                        T=int(d["T"]),
                        converged=Outcome(d["converged"]),
                        tau=num(d["tau"], int),
                        final_mean_belief=float(d["final_mean_belief"]),
                        mean_degree=float(d["mean_degree"]),
                        triangle_count=int(d["triangle_count"]),
                        max_degree=int(d["max_degree"]),
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return out


def write_tail(path, table: np.ndarray):
    _write(path, TAIL_HEADER, ((int(t), p) for t, p in table))


def write_ratio(path, estimates: Iterable[CatastropheEstimate]):
    _write(
        path,
        RATIO_HEADER,
        (
            (e.t, e.n_pairs, "R" if e.replacement else "NR", e.p_max, e.p_sum, e.ratio)
            for e in estimates
        ),
    )


def write_series(path, series: np.ndarray):
    _write(path, SERIES_HEADER, ((int(r), s) for r, s in series))
