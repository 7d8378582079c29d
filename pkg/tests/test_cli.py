import csv
import hashlib
import json

import jsonschema
import numpy as np
import pytest

from infocredit.cli import IV_RECORD_SCHEMA, main
from infocredit.synthdata import GeneratorConfig, generate, write_csv


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


@pytest.fixture(scope="module")
def data_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "data.csv"
    assert main(["simulate", "--n", "20000", "--seed", "7", "--out", str(path)]) == 0
    return path


@pytest.fixture(scope="module")
def small_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli_small") / "small.csv"
    assert main(["simulate", "--n", "4000", "--seed", "3", "--out", str(path)]) == 0
    return path


class TestSimulate:
    def test_line_count(self, data_csv):
        assert len(data_csv.read_bytes().splitlines()) == 20_001

    def test_deterministic(self, data_csv, tmp_path):
        again = tmp_path / "again.csv"
        assert main(["simulate", "--n", "20000", "--seed", "7", "--out", str(again)]) == 0
        assert sha(again) == sha(data_csv)

    def test_bad_group_share(self, tmp_path, capsys):
        code = main(["simulate", "--n", "100", "--group-share", "1.5",
                     "--out", str(tmp_path / "x.csv")])
        assert code == 2
        assert "--group-share" in capsys.readouterr().err

    def test_unknown_flag(self, tmp_path):
        assert main(["simulate", "--bogus", "--out", str(tmp_path / "x.csv")]) == 2

    def test_manifest(self, data_csv):
        man = json.loads(data_csv.with_name(data_csv.name + ".manifest.json").read_text())
        assert man["command"] == "simulate" and man["seed"] == 7
        assert man["outputs"][str(data_csv)] == sha(data_csv)
        assert {"version", "started_at", "finished_at", "config", "inputs"} <= set(man)

    def test_env_seed(self, tmp_path, monkeypatch):
        monkeypatch.setenv("INFOCREDIT_SEED", "7")
        a = tmp_path / "a.csv"
        assert main(["simulate", "--n", "500", "--out", str(a)]) == 0
        b = tmp_path / "b.csv"
        assert main(["simulate", "--n", "500", "--seed", "7", "--out", str(b)]) == 0
        assert sha(a) == sha(b)

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# generator settings\nn = 300\nseed = 11\n")
        a = tmp_path / "a.csv"
        assert main(["--config", str(cfg), "simulate", "--out", str(a)]) == 0
        b = tmp_path / "b.csv"
        assert main(["simulate", "--n", "300", "--seed", "11", "--out", str(b)]) == 0
        assert sha(a) == sha(b)
        # command-line flags win over the file
        c = tmp_path / "c.csv"
        assert main(["--config", str(cfg), "simulate", "--n", "50", "--out", str(c)]) == 0
        assert len(c.read_bytes().splitlines()) == 51

    def test_config_unknown_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("colour = blue\n")
        assert main(["--config", str(cfg), "simulate", "--out", str(tmp_path / "x.csv")]) == 2


class TestIv:
    def test_records(self, data_csv, tmp_path):
        out = tmp_path / "iv.jsonl"
        assert main(["iv", "--data", str(data_csv), "--out", str(out)]) == 0
        recs = read_jsonl(out)
        assert len(recs) == 7
        for r in recs:
            jsonschema.validate(r, IV_RECORD_SCHEMA)
        ivs = [r["iv"] for r in recs]
        assert ivs == sorted(ivs, reverse=True)

    def test_alpha_widens(self, data_csv, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        main(["iv", "--data", str(data_csv), "--alpha", "0.05", "--out", str(a)])
        main(["iv", "--data", str(data_csv), "--alpha", "0.01", "--out", str(b)])
        wide = {r["feature_id"]: r["ci_high"] - r["ci_low"] for r in read_jsonl(b)}
        for r in read_jsonl(a):
            assert wide[r["feature_id"]] > r["ci_high"] - r["ci_low"]

    def test_empty_class_exit_3(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("u,protected,default\n0.1,0,0\n0.2,1,0\n0.3,0,0\n")
        assert main(["iv", "--data", str(p)]) == 3

    def test_missing_file_exit_3(self, tmp_path):
        assert main(["iv", "--data", str(tmp_path / "nope.csv")]) == 3

    def test_schemes_out_feeds_psi(self, data_csv, tmp_path):
        schemes = tmp_path / "bins.json"
        assert main(["iv", "--data", str(data_csv), "--schemes-out", str(schemes),
                     "--out", str(tmp_path / "iv.jsonl")]) == 0
        out = tmp_path / "psi.jsonl"
        assert main(["psi", "--baseline", str(data_csv), "--current", str(data_csv),
                     "--bins-from", str(schemes), "--out", str(out)]) == 0
        assert all(r["psi"] == 0.0 for r in read_jsonl(out))

    @pytest.mark.xfail(strict=True, reason="stump bins are fitted to the noise itself, so the "
                       "normal-reference p-value of a zero-IV feature is far below 0.05")
    def test_zero_iv_feature_null(self, tmp_path):
        passes = 0
        for r in range(100):
            ds = generate(GeneratorConfig(n_rows=5000, seed=500 + r))
            noise = np.random.default_rng(r).normal(size=len(ds))
            ds.X = np.column_stack([ds.X, noise])
            ds.feature_names = ds.feature_names + ("noise",)
            path = tmp_path / "n.csv"
            write_csv(ds, path)
            out = tmp_path / "n.jsonl"
            main(["iv", "--data", str(path), "--out", str(out)])
            rec = next(x for x in read_jsonl(out) if x["feature_id"] == "noise")
            passes += rec["p_value"] > 0.05
        assert passes >= 90


class TestPsi:
    def test_self_is_stable(self, data_csv, tmp_path):
        out = tmp_path / "psi.jsonl"
        assert main(["psi", "--baseline", str(data_csv), "--current", str(data_csv),
                     "--out", str(out)]) == 0
        for r in read_jsonl(out):
            assert r["psi"] == 0.0 and r["label"] == "stable" and not r["drift_detected"]

    def test_planted_drift(self, data_csv, tmp_path):
        cur = tmp_path / "cur.csv"
        assert main(["simulate", "--n", "20000", "--seed", "8", "--shift", "mortgage=0.3",
                     "--shift", "utilization=0.05", "--out", str(cur)]) == 0
        out = tmp_path / "psi.jsonl"
        assert main(["psi", "--baseline", str(data_csv), "--current", str(cur),
                     "--out", str(out)]) == 0
        recs = {r["feature_id"]: r for r in read_jsonl(out)}
        for f in ("mortgage", "utilization"):
            assert recs[f]["drift_detected"]
            assert recs[f]["label"] in ("moderate", "significant")

    def test_schema_mismatch(self, data_csv, tmp_path):
        other = tmp_path / "o.csv"
        other.write_text("u,protected,default\n0.1,0,1\n0.2,1,0\n")
        assert main(["psi", "--baseline", str(data_csv), "--current", str(other)]) == 3


class TestEncodeCompare:
    def test_table(self, data_csv, tmp_path):
        out = tmp_path / "t.csv"
        assert main(["encode-compare", "--data", str(data_csv), "--seed", "7",
                     "--out", str(out)]) == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 9
        for r in rows:
            assert float(r["gap"]) == float(r["test_auc"]) - float(r["train_auc"])
            assert 0.79 <= float(r["test_auc"]) <= 0.87
        boost = {int(r["rounds"]): float(r["test_auc"]) for r in rows
                 if r["encoding"] == "stump_boost"}
        assert abs(boost[100] - boost[50]) < 0.005


class TestFairness:
    def test_outputs(self, data_csv, tmp_path):
        assert main(["fairness", "--data", str(data_csv), "--out-dir", str(tmp_path)]) == 0
        reports = read_jsonl(tmp_path / "fairness.jsonl")
        assert len(reports) == 7
        curve = list(csv.DictReader((tmp_path / "ratio_curve.csv").open()))
        assert len(curve) == 7 * 31
        assert (tmp_path / "manifest.json").exists()


class TestPareto:
    def test_frontier(self, small_csv, tmp_path):
        out = tmp_path / "p"
        assert main(["pareto", "--data", str(small_csv), "--out-dir", str(out)]) == 0
        rows = list(csv.DictReader((out / "frontier.csv").open()))
        assert len(rows) == 9
        eps = [float(r["epsilon"]) for r in rows]
        assert eps == sorted(eps)
        assert list(rows[0])[:7] == ["epsilon", "iv_model", "iv_demographic", "auc", "air",
                                     "feasible", "iterations"]
        assert len(list(out.glob("model_*.json"))) == 9
        man = json.loads((out / "manifest.json").read_text())
        assert man["outputs"][str(out / "frontier.csv")] == sha(out / "frontier.csv")

    def test_custom_grid(self, small_csv, tmp_path):
        out = tmp_path / "p"
        assert main(["pareto", "--data", str(small_csv), "--epsilons", "0.2,5",
                     "--out-dir", str(out)]) == 0
        assert len((out / "frontier.csv").read_text().splitlines()) == 3

    def test_unsorted_grid_rejected(self, small_csv, tmp_path):
        assert main(["pareto", "--data", str(small_csv), "--epsilons", "1,0.5",
                     "--out-dir", str(tmp_path)]) == 2
