import json
from pathlib import Path

import pytest

from margin_probe.cli import main

SMOKE = Path(__file__).parents[1] / "data" / "smoke.csv"


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["gen-dataset", "--rows", "5", "--out", "x.csv", "--frobnicate"])
    assert exc.value.code == 2


def test_missing_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_data_error_exits_1(tmp_path, capsys):
    assert main(["train", "--data", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "m.json")]) == 1
    assert "error:" in capsys.readouterr().err


def test_evaluate_smoke_dataset(tmp_path, capsys):
    model = tmp_path / "model.json"
    assert main(["train", "--data", str(SMOKE), "--out", str(model),
                 "--split-seed", "3"]) == 0
    assert main(["evaluate", "--model", str(model), "--data", str(SMOKE),
                 "--subset", "test", "--split-seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "RMSE" in out


def test_predict_and_bad_features(tmp_path, capsys):
    model = tmp_path / "model.json"
    main(["train", "--data", str(SMOKE), "--out", str(model)])
    assert main(["predict", "--model", str(model),
                 "--features", "15.2,-1.0,193.7,10,0.4"]) == 0
    assert "margin" in capsys.readouterr().out
    assert main(["predict", "--model", str(model),
                 "--features", "1,2,3"]) == 1


def test_manifest_written_without_timestamps(tmp_path):
    out = tmp_path / "tiny.csv"
    assert main(["gen-dataset", "--rows", "3", "--seed", "4",
                 "--out", str(out)]) == 0
    manifest = json.loads((tmp_path / "tiny.csv.manifest.json").read_text())
    assert manifest["command"] == "gen-dataset"
    assert manifest["options"]["seed"] == 4
    assert manifest["outputs"] == [str(out)]
    assert "margin-probe" in manifest["versions"]
    assert not any("time" in k or "date" in k for k in manifest)


def test_identical_runs_are_byte_identical(tmp_path):
    for name in ("a.csv", "b.csv"):
        assert main(["gen-dataset", "--rows", "20", "--seed", "6",
                     "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    for name in ("a.json", "b.json"):
        assert main(["train", "--data", str(tmp_path / "a.csv"),
                     "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_config_overrides_change_labels(tmp_path):
    cfg = tmp_path / "fiber.cfg"
    cfg.write_text("nf_db = 7.0\n")
    assert main(["gen-dataset", "--rows", "5", "--seed", "1",
                 "--out", str(tmp_path / "base.csv")]) == 0
    assert main(["gen-dataset", "--rows", "5", "--seed", "1",
                 "--config", str(cfg),
                 "--out", str(tmp_path / "loud.csv")]) == 0
    assert (tmp_path / "base.csv").read_text() != \
        (tmp_path / "loud.csv").read_text()


def test_report_requires_kind_inputs(tmp_path):
    model = tmp_path / "model.json"
    main(["train", "--data", str(SMOKE), "--out", str(model)])
    with pytest.raises(SystemExit) as exc:
        main(["report", "--kind", "hist", "--model", str(model),
              "--out", str(tmp_path / "h")])
    assert exc.value.code == 2


def test_report_hist_emits_three_files(tmp_path):
    model = tmp_path / "model.json"
    main(["train", "--data", str(SMOKE), "--out", str(model)])
    assert main(["report", "--kind", "hist", "--model", str(model),
                 "--data", str(SMOKE), "--out", str(tmp_path / "hist")]) == 0
    for ext in (".csv", ".json", ".png", ".manifest.json"):
        assert (tmp_path / ("hist" + ext)).exists()


def test_sweep_granularity_cli(tmp_path, capsys):
    model = tmp_path / "model.json"
    main(["train", "--data", str(SMOKE), "--out", str(model)])
    assert main(["sweep-granularity", "--model", str(model),
                 "--data", str(SMOKE), "--granularities", "0,0.2",
                 "--out", str(tmp_path / "gran")]) == 0
    assert "g=0.2" in capsys.readouterr().out


def test_adapt_pipeline_cli(tmp_path, capsys):
    model = tmp_path / "model.json"
    main(["train", "--data", str(SMOKE), "--out", str(model)])
    surr = tmp_path / "surr.csv"
    assert main(["surrogate-measure", "--out", str(surr)]) == 0
    recal = tmp_path / "recal.json"
    assert main(["adapt", "--model", str(model), "--measurements",
                 str(surr), "--k", "5", "--out", str(recal)]) == 0
    assert "slope" in capsys.readouterr().out
    assert main(["report", "--kind", "power", "--model", str(model),
                 "--measurements", str(surr), "--recal", str(recal),
                 "--out", str(tmp_path / "power")]) == 0
