import csv

from margin_probe.analysis import error_histogram, power_sweep
from margin_probe.report import (write_granularity, write_histogram,
                                 write_sweep)


def test_histogram_report_files(tmp_path, small_model, small_split):
    hist = error_histogram(small_model, small_split.test)
    outputs = write_histogram(hist, tmp_path / "hist")
    assert [p.rsplit(".", 1)[1] for p in outputs] == ["csv", "json", "png"]
    with open(outputs[0], newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(hist.counts)
    assert sum(int(r["count"]) for r in rows) == hist.n_samples
    assert (tmp_path / "hist.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_sweep_report_round_trip(tmp_path, small_model, surrogate_records):
    result = power_sweep(small_model, surrogate_records[:600])
    outputs = write_sweep(result, tmp_path / "power",
                          summary={"extra_metric": 1.5})
    with open(outputs[0], newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(result.grid)
    assert [float(r["p_ch_dbm"]) for r in rows] == list(result.grid)
    assert [float(r["gn_mean"]) for r in rows] == list(result.gn_mean)
    assert '"extra_metric": 1.5' in (tmp_path / "power.json").read_text()


def test_granularity_report(tmp_path):
    rows = ((0.0, 0.12, 0.12), (0.2, 0.25, 0.17))
    outputs = write_granularity(rows, tmp_path / "gran")
    text = (tmp_path / "gran.json").read_text()
    assert '"rmse_retrained_at_0.2": 0.17' in text
    with open(outputs[0], newline="") as fh:
        parsed = list(csv.DictReader(fh))
    assert float(parsed[1]["rmse_original_db"]) == 0.25


def test_reports_are_byte_deterministic(tmp_path, small_model, small_split):
    hist = error_histogram(small_model, small_split.test)
    write_histogram(hist, tmp_path / "a")
    write_histogram(hist, tmp_path / "b")
    for ext in (".csv", ".json", ".png"):
        assert (tmp_path / ("a" + ext)).read_bytes() == \
            (tmp_path / ("b" + ext)).read_bytes()
