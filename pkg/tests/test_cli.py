"""CLI contract: flags, config files, CSV schema, reproducibility."""

import numpy as np
import pytest

from mwrelay import write_beta_file
from mwrelay.cli import (
    CSV_HEADER,
    db_to_linear,
    parse_and_dispatch,
    parse_m_range,
    read_config_file,
    write_csv,
)


def test_db_conversion_exact_points():
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(10.0) == 10.0
    assert db_to_linear(3.0) == pytest.approx(1.9952623, rel=1e-6)
    assert db_to_linear(-10.0) == pytest.approx(0.1, rel=1e-12)


def test_m_range_parsing():
    assert parse_m_range("100") == [100]
    assert parse_m_range("50:500:50") == [50, 100, 150, 200, 250, 300, 350, 400, 450, 500]
    assert parse_m_range("50:90:25") == [50, 75]  # stop dropped when misaligned
    for bad in ("0", "10:5:5", "10:20:0", "1:2:3:4", "abc"):
        with pytest.raises(Exception):
            parse_m_range(bad)


def test_write_csv_schema(tmp_path):
    path = tmp_path / "out.csv"
    rows = [("sweep-m", "proposed", 100, 10, 1, 0, "se_mc", 1.23456789012345, 0.01, 7)]
    write_csv(path, rows, {"k": 10, "seed": 7})
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0] == "# k = 10"
    assert lines[1] == "# seed = 7"
    assert lines[2] == ",".join(CSV_HEADER)
    assert lines[3].startswith("sweep-m,proposed,100,10,1,0,se_mc,1.23456789012,")
    # 12 significant digits in the value column
    assert len(lines[3].split(",")[7].replace(".", "").lstrip("0")) >= 10


def test_write_csv_empty_is_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_csv(path, [])
    assert path.read_text() == ",".join(CSV_HEADER) + "\n"


def test_write_csv_rejects_unknown_metric(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "x.csv", [("e", "proposed", 1, 2, 0, 0, "bogus", 1.0, 0.0, 1)])


def test_config_file_layering(tmp_path, monkeypatch):
    monkeypatch.setenv("MWRELAY_THREADS", "2")
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment line\nk = 4\ntrials = 60\nseed = 5\nm = 16\n")
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    code = parse_and_dispatch(
        ["bounds-table", "--config", str(cfg), "--out", str(out_a)]
    )
    assert code == 0
    # CLI flag overrides the file value.
    code = parse_and_dispatch(
        ["bounds-table", "--config", str(cfg), "--k", "5", "--out", str(out_b)]
    )
    assert code == 0
    assert ",16,4," in out_a.read_text()
    assert ",16,5," in out_b.read_text()


def test_config_file_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense line\n")
    with pytest.raises(Exception):
        read_config_file(bad)
    unknown = tmp_path / "unknown.cfg"
    unknown.write_text("warp-speed = 9\n")
    with pytest.raises(Exception):
        read_config_file(unknown)


def test_sweep_m_reproducible_across_thread_counts(tmp_path, monkeypatch):
    args = ["sweep-m", "--k", "4", "--m", "16:32:16", "--trials", "80", "--seed", "3"]
    monkeypatch.setenv("MWRELAY_THREADS", "1")
    a = tmp_path / "a.csv"
    assert parse_and_dispatch(args + ["--out", str(a)]) == 0
    monkeypatch.setenv("MWRELAY_THREADS", "8")
    b = tmp_path / "b.csv"
    assert parse_and_dispatch(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_m_metrics_and_order(tmp_path, monkeypatch):
    monkeypatch.setenv("MWRELAY_THREADS", "2")
    out = tmp_path / "sweep.csv"
    assert parse_and_dispatch(
        ["sweep-m", "--k", "4", "--m", "16", "--trials", "40", "--seed", "1",
         "--out", str(out)]
    ) == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    rows = [l.split(",") for l in lines[1:]]
    metrics = {r[6] for r in rows}
    assert metrics == {"sum_se", "se_mc", "se_bound", "se_asym"}
    # Aggregate rows lead and carry user=0/slot=0.
    assert rows[0][6] == "sum_se" and rows[0][4] == "0" and rows[0][5] == "0"
    assert rows[1][6] == "se_bound"
    # 2 aggregates + per user: uplink (2 rows) + 3 slots x 2 rows.
    assert len(rows) == 2 + 4 * (2 + 3 * 2)


def test_compare_schemes_rows(tmp_path, monkeypatch):
    monkeypatch.setenv("MWRELAY_THREADS", "2")
    out = tmp_path / "cmp.csv"
    assert parse_and_dispatch(
        ["compare-schemes", "--k", "4", "--m", "16", "--trials", "40",
         "--seed", "2", "--out", str(out)]
    ) == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    rows = [l.split(",") for l in lines[1:]]
    assert {r[1] for r in rows} == {"conventional", "proposed"}
    assert all(r[6] in {"sum_se", "se_bound"} for r in rows)


def test_cdf_rows_sorted_with_percentile(tmp_path, monkeypatch):
    monkeypatch.setenv("MWRELAY_THREADS", "2")
    out = tmp_path / "cdf.csv"
    assert parse_and_dispatch(
        ["cdf", "--k", "4", "--m", "24", "--profiles", "9", "--trials", "30",
         "--seed", "4", "--beta", "geometry", "--out", str(out)]
    ) == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    rows = [l.split(",") for l in lines[1:]]
    samples = [float(r[7]) for r in rows if r[6] == "cdf_sample"]
    assert len(samples) == 9
    assert samples == sorted(samples)
    p5 = [float(r[7]) for r in rows if r[6] == "p5"]
    assert len(p5) == 1
    assert samples[0] <= p5[0] <= samples[-1]


def test_cdf_rejects_m_range_and_beta_file(tmp_path):
    out = tmp_path / "x.csv"
    assert parse_and_dispatch(
        ["cdf", "--k", "4", "--m", "8:16:8", "--profiles", "2", "--trials", "5",
         "--out", str(out)]
    ) == 1
    assert parse_and_dispatch(
        ["cdf", "--k", "4", "--m", "8", "--profiles", "2", "--trials", "5",
         "--beta", "file:whatever.txt", "--out", str(out)]
    ) == 1


def test_beta_file_flow(tmp_path, monkeypatch):
    monkeypatch.setenv("MWRELAY_THREADS", "2")
    beta_path = tmp_path / "beta.txt"
    write_beta_file(beta_path, np.array([0.5, 1.0, 1.5, 2.0]))
    out = tmp_path / "o.csv"
    assert parse_and_dispatch(
        ["bounds-table", "--k", "4", "--m", "16", "--beta", f"file:{beta_path}",
         "--out", str(out)]
    ) == 0
    # Wrong user count must fail loudly.
    assert parse_and_dispatch(
        ["bounds-table", "--k", "5", "--m", "16", "--beta", f"file:{beta_path}",
         "--out", str(out)]
    ) == 1


def test_unknown_flag_nonzero():
    assert parse_and_dispatch(["sweep-m", "--warp", "9"]) != 0
    assert parse_and_dispatch(["unknown-experiment"]) != 0


def test_unwritable_output_nonzero(tmp_path):
    missing_dir = tmp_path / "no" / "such" / "dir" / "x.csv"
    code = parse_and_dispatch(
        ["bounds-table", "--k", "4", "--m", "8", "--out", str(missing_dir)]
    )
    assert code == 1


def test_missing_out_nonzero():
    assert parse_and_dispatch(["sweep-m", "--k", "4", "--m", "8", "--trials", "5"]) == 1


def test_selftest_exits_zero(monkeypatch, capsys):
    monkeypatch.setenv("MWRELAY_THREADS", "2")
    assert parse_and_dispatch(["selftest", "--seed", "1"]) == 0
    captured = capsys.readouterr()
    assert "PASS" in captured.out
    assert "FAIL" not in captured.out


def test_trials_default_per_experiment(tmp_path, monkeypatch):
    monkeypatch.setenv("MWRELAY_THREADS", "2")
    cdf_out = tmp_path / "cdf_default.csv"
    assert parse_and_dispatch(
        ["cdf", "--k", "4", "--m", "16", "--profiles", "2", "--seed", "1",
         "--beta", "geometry", "--out", str(cdf_out)]
    ) == 0
    assert "# trials = 1000\n" in cdf_out.read_text()
    sweep_out = tmp_path / "sweep_default.csv"
    assert parse_and_dispatch(
        ["sweep-m", "--k", "4", "--m", "16", "--seed", "1", "--out", str(sweep_out)]
    ) == 0
    assert "# trials = 10000\n" in sweep_out.read_text()
