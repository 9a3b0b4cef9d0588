import csv
import json

import numpy as np
import pytest

from dcelm import cli, data, metrics


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, synth_dir):
    _, manifest = synth_dir
    root = tmp_path_factory.mktemp("cli")
    feats = root / "f.bin"
    code = cli.main(["extract", "--manifest", str(manifest), "--weights-seed", "0",
                     "--out", str(feats), "--save-weights", str(root / "w.json")])
    assert code == 0
    return root, manifest, feats


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_extract_outputs(workdir, synth_features):
    root, _, feats = workdir
    F = data.read_features(feats)
    assert F.shape == (400, 300)
    side = json.loads((root / "f.bin.json").read_text())
    assert side["feature_dim"] == 300 and len(side["records"]) == 400
    assert side["config"]["weights_seed"] == 0
    train = np.array([r["split"] == "train" for r in side["records"]])
    np.testing.assert_array_equal(F[train], synth_features[0])


def test_extract_from_saved_weights_matches_seed(workdir, tmp_path):
    root, manifest, feats = workdir
    out = tmp_path / "g.bin"
    assert cli.main(["extract", "--manifest", str(manifest), "--weights", str(root / "w.json"),
                     "--out", str(out)]) == 0
    assert out.read_bytes() == feats.read_bytes()


def test_extract_augment_multiplies_positive_train(workdir, tmp_path):
    _, manifest, _ = workdir
    out = tmp_path / "a.bin"
    assert cli.main(["extract", "--manifest", str(manifest), "--weights-seed", "0", "--augment",
                     "--out", str(out)]) == 0
    # 100 positive training images become 500
    assert data.read_features(out).shape[0] == 400 + 4 * 100


def test_smoke_pipeline_none(workdir, tmp_path):
    _, _, feats = workdir
    model = tmp_path / "m.json"
    assert cli.main(["train", "--features", str(feats), "--optimizer", "none", "--out", str(model)]) == 0
    doc = json.loads(model.read_text())
    assert doc["elm_config"]["n_hidden"] == 120 and doc["training"]["optimizer"] == "none"
    assert "train_seconds" in json.loads((tmp_path / "m.json.timing.json").read_text())
    rep = tmp_path / "rep"
    assert cli.main(["eval", "--model", str(model), "--features", str(feats), "--out", str(rep)]) == 0
    for name in ("report.json", "rates.csv", "roc.csv", "pr.csv", "epg.csv", "epg_hist.csv", "timing.json"):
        assert (rep / name).exists(), name
    report = json.loads((rep / "report.json").read_text())
    assert [row["threshold"] for row in report["thresholds"]] == [0.1, 0.2, 0.3, 0.4]
    assert report["config"]["model"] == str(model)
    assert 0.0 <= report["auc"] <= 1.0


def test_report_rates_recompute_from_confusion(workdir, tmp_path):
    _, _, feats = workdir
    model = tmp_path / "m.json"
    cli.main(["train", "--features", str(feats), "--optimizer", "none", "--hidden", "10", "--out", str(model)])
    rep = tmp_path / "rep"
    cli.main(["eval", "--model", str(model), "--features", str(feats), "--thresholds", "0.3,0.5,0.7",
              "--out", str(rep)])
    report = json.loads((rep / "report.json").read_text())
    rows = read_csv(rep / "rates.csv")
    for row, entry in zip(rows, report["thresholds"]):
        cm = metrics.ConfusionMatrix(**entry["confusion"])
        assert metrics.rates(cm) == entry["rates"]
        assert int(row["tp"]) == cm.tp and int(row["tn"]) == cm.tn
        if entry["rates"]["sensitivity"] is not None:
            assert float(row["sensitivity"]) == entry["rates"]["sensitivity"]
            assert float(row["sensitivity_ci"]) == metrics.confidence_interval(
                entry["rates"]["sensitivity"], cm.positives)
    epg = read_csv(rep / "epg.csv")
    assert len(epg) == 200
    hist = read_csv(rep / "epg_hist.csv")
    assert set(hist[0]) == {"bin_lo", "bin_hi", "negative", "positive"}
    assert sum(int(h["positive"]) + int(h["negative"]) for h in hist) == 200


def test_train_choa_byte_identical(workdir, tmp_path):
    _, _, feats = workdir
    args = ["train", "--features", str(feats), "--optimizer", "choa", "--hidden", "8",
            "--pop", "6", "--iters", "2", "--seed", "3", "--out", str(tmp_path / "m.json")]
    assert cli.main(args) == 0
    first = (tmp_path / "m.json").read_bytes()
    assert cli.main(args + ["--jobs", "1"]) == 0
    assert (tmp_path / "m.json").read_bytes() == first
    doc = json.loads(first)
    assert doc["training"]["iterations"] == 2 and len(doc["training"]["trace"]) == 2


def test_bench_choa_sphere(tmp_path):
    assert cli.main(["bench", "--optimizers", "choa2", "--seeds", "2", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "results.json").read_text())
    assert all(v < 1e-2 for v in doc["results"]["choa2"]["final_losses"])
    assert doc["p_values"] == [[1.0]]


def test_config_file_flags_override(workdir, tmp_path):
    _, _, feats = workdir
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"features": str(feats), "optimizer": "none", "hidden": 7,
                               "out": str(tmp_path / "a.json")}))
    assert cli.main(["train", "--config", str(cfg), "--hidden", "5"]) == 0
    doc = json.loads((tmp_path / "a.json").read_text())
    assert doc["elm_config"]["n_hidden"] == 5
    assert doc["config"]["hidden"] == 5


@pytest.mark.parametrize("argv,code", [
    (["train", "--out", "x.json"], 2),
    (["eval", "--model", "m", "--features", "f", "--thresholds", "0.1,abc", "--out", "r"], 2),
    (["extract", "--manifest", "m.csv", "--structure", "in_6c_2p_12c_2p_120f",
      "--weights-seed", "0", "--out", "f"], 2),
    (["train", "--features", "missing.bin", "--out", "x.json"], 3),
    (["bench", "--optimizers", "pso", "--seeds", "1", "--out", "b"], 2),
])
def test_exit_codes(argv, code, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(argv) == code


def test_usage_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["frobnicate"])
    assert info.value.code == 2


def test_bad_manifest_is_data_error(tmp_path):
    m = tmp_path / "m.csv"
    m.write_text("path,label,split\nx.pgm,maybe,train\n")
    assert cli.main(["extract", "--manifest", str(m), "--weights-seed", "0", "--out", str(tmp_path / "f")]) == 3


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert cli.main(["bench", "--config", str(cfg), "--out", str(tmp_path)]) == 2


@pytest.mark.filterwarnings("ignore:overflow")
def test_numeric_failure_exit_four(workdir, tmp_path):
    _, _, feats = workdir
    model = tmp_path / "m.json"
    cli.main(["train", "--features", str(feats), "--optimizer", "none", "--hidden", "4", "--out", str(model)])
    doc = json.loads(model.read_text())
    # output 0 overflows to inf for every sample
    doc["elm"]["Q"] = [[1e308, 0.0] for _ in doc["elm"]["Q"]]
    model.write_text(json.dumps(doc))
    assert cli.main(["eval", "--model", str(model), "--features", str(feats), "--out", str(tmp_path / "r")]) == 4


def test_synth_command(tmp_path):
    assert cli.main(["synth", "--out", str(tmp_path), "--n-train", "8", "--n-test", "4"]) == 0
    assert len(data.load_manifest(tmp_path / "manifest.csv")) == 12
