import csv

import pytest

from aonpgg import cli
from aonpgg.graphs import load_edge_list, load_positions
from aonpgg.outputs import RATIO_HEADER, RUNS_HEADER, TAIL_HEADER, read_runs, write_runs


def only_dir(root):
    (d,) = [p for p in root.iterdir() if p.is_dir()]
    return d


def header(path):
    with open(path) as f:
        return next(csv.reader(f))


def test_run_circulant(tmp_path, capsys):
    assert cli.main(["run", "--graph", "circulant", "--n", "50", "--l", "2", "--seed", "1",
                     "--out", str(tmp_path)]) == 0
    out = only_dir(tmp_path)
    rows = read_runs(out / "runs.csv")
    assert len(rows) == 1 and rows[0].r_g_or_l == 2
    assert tuple(header(out / "runs.csv")) == RUNS_HEADER
    assert "converged=" in capsys.readouterr().out


def test_run_writes_series(tmp_path):
    cli.main(["run", "--graph", "circulant", "--l", "4", "--record-stride", "100", "--out", str(tmp_path)])
    out = only_dir(tmp_path)
    assert header(out / "series_0.csv") == ["round", "total_belief"]


def test_run_odd_l(tmp_path, capsys):
    assert cli.main(["run", "--l", "3", "--out", str(tmp_path)]) == 2
    assert "l must be even" in capsys.readouterr().err


def test_run_subcritical_rgg(tmp_path, capsys):
    code = cli.main(["run", "--graph", "rgg", "--r-g", "0.01", "--max-attempts", "5", "--out", str(tmp_path)])
    assert code != 0
    assert "connected" in capsys.readouterr().err


def test_batch_outputs_and_summary(tmp_path, capsys):
    assert cli.main(["batch", "--graph", "circulant", "--l", "8", "--runs", "100", "--out", str(tmp_path)]) == 0
    out = only_dir(tmp_path)
    assert len(read_runs(out / "runs.csv")) == 100
    assert tuple(header(out / "tail.csv")) == TAIL_HEADER
    assert "defect=1.000" in capsys.readouterr().out


def test_batch_zero_runs(tmp_path):
    assert cli.main(["batch", "--runs", "0", "--out", str(tmp_path)]) == 2


def test_batch_byte_identical_across_parallelism(tmp_path):
    args = ["batch", "--graph", "rgg", "--r-g", "0.3", "--runs", "8", "--T", "20000", "--seed", "3"]
    cli.main(args + ["--out", str(tmp_path / "a")])
    cli.main(args + ["--out", str(tmp_path / "b"), "--parallelism", "3"])
    a = (only_dir(tmp_path / "a") / "runs.csv").read_bytes()
    b = (only_dir(tmp_path / "b") / "runs.csv").read_bytes()
    assert a == b


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(
        "[game]\nalpha = 0.1\nT = 5000\n\n[graph]\nkind = circulant\nn = 20\nl = 4\n\n"
        "[batch]\nn_runs = 3\nmaster_seed = 5\n\n"
        f"[output]\ndirectory = {tmp_path / 'res'}\n"
    )
    assert cli.main(["batch", "--config", str(cfg), "--runs", "2"]) == 0
    rows = read_runs(only_dir(tmp_path / "res") / "runs.csv")
    assert len(rows) == 2
    assert rows[0].alpha == 0.1 and rows[0].T == 5000 and rows[0].n == 20 and rows[0].r_g_or_l == 4


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[game]\nbeta = 1\n")
    assert cli.main(["batch", "--config", str(bad)]) == 2
    bad.write_text("[game]\nT = lots\n")
    assert cli.main(["batch", "--config", str(bad)]) == 2
    assert cli.main(["batch", "--config", str(tmp_path / "missing.ini")]) == 2


def test_output_root_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.ENV_OUTPUT_ROOT, str(tmp_path))
    assert cli.main(["run", "--graph", "circulant", "--l", "2"]) == 0
    assert (only_dir(tmp_path) / "runs.csv").is_file()


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit):
        cli.main(["batch", "--help"])
    text = capsys.readouterr().out
    for fragment in ("default: 0.3", "default: 50", "default: 4.0", "default: 0.0001",
                     "default: 10000000", "default: 500"):
        assert fragment in text


def fake_runs(path, taus, T=10**7):
    from aonpgg.engine import Outcome
    from aonpgg.stats import RunRecord

    recs = [
        RunRecord(i, "g", i, 0.25, 50, 0.3, 4.0, T,
                  Outcome.TIMEOUT if t is None else Outcome.DEFECT, t, 0.1, 8.0, 30, 12)
        for i, t in enumerate(taus)
    ]
    write_runs(path, recs)


def test_ratio_no_replacement(tmp_path):
    runs = tmp_path / "runs.csv"
    fake_runs(runs, [2 * 10**6] * 100 + [10] * 300 + [None] * 100)
    assert cli.main(["ratio", str(runs), "--t", "1e6", "--pairs", "250"]) == 0
    with open(tmp_path / "ratio.csv") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == RATIO_HEADER
    assert len(rows) == 2 and rows[1][:3] == ["1000000", "250", "NR"]
    assert "T + 1" in (tmp_path / "ratio.meta").read_text()


def test_ratio_short_input(tmp_path, capsys):
    runs = tmp_path / "runs.csv"
    fake_runs(runs, [5] * 300)
    assert cli.main(["ratio", str(runs), "--pairs", "250"]) == 2
    assert "500" in capsys.readouterr().err


def test_ratio_replacement_small(tmp_path):
    runs = tmp_path / "runs.csv"
    fake_runs(runs, [5, 7])
    assert cli.main(["ratio", str(runs), "--pairs", "250", "--replacement", "--t", "8",
                     "--out", str(tmp_path / "r.csv")]) == 0
    assert (tmp_path / "r.csv").read_text().splitlines()[1].startswith("8,250,R,0,")


def test_ratio_missing_file(tmp_path):
    assert cli.main(["ratio", str(tmp_path / "nope.csv")]) == 2


def test_graph_circulant(capsys, tmp_path):
    assert cli.main(["graph", "circulant", "--n", "50", "--l", "4", "--out", str(tmp_path / "c4.txt")]) == 0
    text = capsys.readouterr().out
    assert "degrees=[4]" in text and "triangles=50" in text
    assert load_edge_list(tmp_path / "c4.txt").edge_count == 100
    cli.main(["graph", "circulant", "--n", "50", "--l", "2"])
    assert "triangles=0" in capsys.readouterr().out


def test_graph_rgg_reproducible(tmp_path):
    for name in ("a", "b"):
        assert cli.main(["graph", "rgg", "--n", "50", "--r-g", "0.3", "--seed", "7",
                         "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
    assert (tmp_path / "a.pos").read_bytes() == (tmp_path / "b.pos").read_bytes()
    assert load_positions(tmp_path / "a.pos", 50).shape == (50, 2)
