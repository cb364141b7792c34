import json

import numpy as np
import pytest

from pcdal import new_pool, save_pool, softmax, write_tensor
from pcdal.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_score_fixture(dirpath, n=3, break_one=False):
    rng = np.random.default_rng(0)
    entries = []
    for i in range(n):
        a = softmax(rng.normal(size=4), 0)
        b = softmax(rng.normal(size=4), 0)
        pa, pb = f"m{i}a.ptns", f"m{i}b.ptns"
        write_tensor(a, dirpath / pa)
        if not (break_one and i == 1):
            write_tensor(b, dirpath / pb)
        entries.append({
            "sample_id": f"s{i}",
            "task": "classification",
            "predictions": [
                {"perturbation": "identity", "path": pa},
                {"perturbation": "flip_h", "path": pb},
            ],
        })
    path = dirpath / "manifest.json"
    path.write_text(json.dumps(entries))
    return path


class TestScoreLane:
    def test_jsonl_output_and_exit_zero(self, tmp_path, capsys):
        manifest = write_score_fixture(tmp_path)
        code, out, _ = run_cli(capsys, "score", "--manifest", str(manifest),
                               "--perturbations", "identity,flip_h")
        assert code == 0
        lines = [json.loads(l) for l in out.strip().splitlines()]
        assert [l["sample_id"] for l in lines] == ["s0", "s1", "s2"]
        assert all(l["score"] >= 0 for l in lines)
        assert all(l["n_predictions"] == 2 for l in lines)

    def test_failure_exits_one_but_scores_rest(self, tmp_path, capsys):
        manifest = write_score_fixture(tmp_path, break_one=True)
        out_path = tmp_path / "scores.jsonl"
        code, _, err = run_cli(capsys, "score", "--manifest", str(manifest),
                               "--perturbations", "identity,flip_h",
                               "--out", str(out_path))
        assert code == 1
        assert "failed" in err
        lines = [json.loads(l) for l in out_path.read_text().splitlines()]
        assert "error" in lines[1]
        assert "score" in lines[0]

    def test_csv_sidecar(self, tmp_path, capsys):
        manifest = write_score_fixture(tmp_path)
        csv_path = tmp_path / "scores.csv"
        code, _, _ = run_cli(capsys, "score", "--manifest", str(manifest),
                             "--perturbations", "identity,flip_h",
                             "--csv", str(csv_path))
        assert code == 0
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "sample_id,score,n_predictions,error"
        assert len(lines) == 4

    def test_dispersion_flags(self, tmp_path, capsys):
        manifest = write_score_fixture(tmp_path)
        code_mse, out_mse, _ = run_cli(capsys, "score", "--manifest", str(manifest),
                                       "--perturbations", "identity,flip_h")
        code_kl, out_kl, _ = run_cli(capsys, "score", "--manifest", str(manifest),
                                     "--perturbations", "identity,flip_h",
                                     "--dispersion", "kl")
        assert code_mse == code_kl == 0
        assert out_mse != out_kl


class TestSelectAdvanceSplit:
    def _pool(self, tmp_path, n=8, labeled=2):
        ids = [f"s{i}" for i in range(n)]
        pool = new_pool(ids, seed=11, labeled=ids[:labeled])
        path = tmp_path / "pool.json"
        save_pool(pool, path)
        return path, ids

    def test_select_ranked(self, tmp_path, capsys):
        pool_path, ids = self._pool(tmp_path)
        scores = tmp_path / "scores.jsonl"
        scores.write_text("\n".join(
            json.dumps({"sample_id": sid, "score": i * 0.5})
            for i, sid in enumerate(ids)) + "\n")
        code, out, _ = run_cli(capsys, "select", "--pool", str(pool_path),
                               "--strategy", "hpi", "--budget", "2",
                               "--scores", str(scores))
        assert code == 0
        assert json.loads(out) == ["s7", "s6"]

    def test_select_random_uses_pool_seed(self, tmp_path, capsys):
        pool_path, _ = self._pool(tmp_path)
        _, out1, _ = run_cli(capsys, "select", "--pool", str(pool_path),
                             "--strategy", "random", "--budget", "3")
        _, out2, _ = run_cli(capsys, "select", "--pool", str(pool_path),
                             "--strategy", "random", "--budget", "3")
        assert out1 == out2
        _, out3, _ = run_cli(capsys, "select", "--pool", str(pool_path),
                             "--strategy", "random", "--budget", "3",
                             "--seed", "99")
        assert out1 != out3

    def test_select_missing_scores_fails(self, tmp_path, capsys):
        pool_path, _ = self._pool(tmp_path)
        code, _, err = run_cli(capsys, "select", "--pool", str(pool_path),
                               "--strategy", "hpi", "--budget", "2")
        assert code == 1
        assert "error" in err

    def test_advance_round_trip(self, tmp_path, capsys):
        pool_path, ids = self._pool(tmp_path)
        sel_path = tmp_path / "sel.json"
        sel_path.write_text(json.dumps(["s5", "s6"]))
        out_path = tmp_path / "pool2.json"
        code, _, _ = run_cli(capsys, "advance", "--pool", str(pool_path),
                             "--selected", str(sel_path), "--strategy", "hpi",
                             "--out", str(out_path))
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert "s5" in doc["labeled_ids"]
        assert doc["rounds"][0]["strategy"] == "hpi"
        assert doc["rounds"][0]["budget"] == 2

    def test_advance_rejects_labeled_id(self, tmp_path, capsys):
        pool_path, ids = self._pool(tmp_path)
        sel_path = tmp_path / "sel.json"
        sel_path.write_text(json.dumps([ids[0]]))  # already labeled
        code, _, err = run_cli(capsys, "advance", "--pool", str(pool_path),
                               "--selected", str(sel_path), "--strategy", "hpi")
        assert code == 1
        assert "error" in err

    def test_split(self, tmp_path, capsys):
        labels_path = tmp_path / "labels.json"
        labels_path.write_text(json.dumps({f"s{i}": i % 2 for i in range(12)}))
        code, out, _ = run_cli(capsys, "split", "--labels", str(labels_path),
                               "--k", "3", "--seed", "1")
        assert code == 0
        folds = json.loads(out)
        assert len(folds) == 3
        assert sorted(sid for f in folds for sid in f) == sorted(f"s{i}" for i in range(12))


class TestMetricsLane:
    def test_segmentation_csv(self, tmp_path, capsys):
        pred = np.zeros((8, 8))
        pred[2:5, 2:5] = 1
        truth = np.zeros((8, 8))
        truth[2:6, 2:5] = 1
        write_tensor(pred, tmp_path / "p.ptns")
        write_tensor(truth, tmp_path / "t.ptns")
        manifest = tmp_path / "m.json"
        manifest.write_text(json.dumps({
            "task": "segmentation",
            "samples": [{"sample_id": "m0", "pred": "p.ptns", "truth": "t.ptns"}],
        }))
        code, out, _ = run_cli(capsys, "metrics", "--manifest", str(manifest))
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "sample_id,dice,pa,hd95"
        cells = lines[1].split(",")
        assert cells[0] == "m0"
        assert float(cells[1]) == pytest.approx(2 * 9 / (18 + 3))
        assert lines[2].startswith("mean,")

    def test_empty_mask_fails_without_skip(self, tmp_path, capsys):
        write_tensor(np.zeros((4, 4)), tmp_path / "p.ptns")
        write_tensor(np.ones((4, 4)), tmp_path / "t.ptns")
        manifest = tmp_path / "m.json"
        manifest.write_text(json.dumps({
            "task": "segmentation",
            "samples": [{"sample_id": "m0", "pred": "p.ptns", "truth": "t.ptns"}],
        }))
        code, _, err = run_cli(capsys, "metrics", "--manifest", str(manifest))
        assert code == 1
        code, out, err = run_cli(capsys, "metrics", "--manifest", str(manifest),
                                 "--skip-empty")
        assert code == 0
        assert "skipped" in err
        assert out.splitlines()[1].endswith(",")  # empty hd95 cell

    def test_classification_manifest(self, tmp_path, capsys):
        write_tensor(np.array([0.0, 1.0, 1.0, 2.0]), tmp_path / "p.ptns")
        write_tensor(np.array([0.0, 1.0, 0.0, 2.0]), tmp_path / "t.ptns")
        manifest = tmp_path / "m.json"
        manifest.write_text(json.dumps({
            "task": "classification",
            "n_classes": 3,
            "samples": [{"sample_id": "b0", "pred": "p.ptns", "truth": "t.ptns"}],
        }))
        code, out, _ = run_cli(capsys, "metrics", "--manifest", str(manifest))
        assert code == 0
        assert out.splitlines()[0] == "sample_id,acc,pre"
        assert float(out.splitlines()[1].split(",")[1]) == 0.75


class TestSimulateLane:
    def test_writes_reports(self, tmp_path, capsys):
        cfg = dict(
            task="classification",
            dataset={"n_classes": 2, "train_per_class": 10, "test_per_class": 5,
                     "image_size": 4, "seed": 5},
            strategies=["hpi", "random"],
            schedule={"initial": 0.3, "step": 0.3, "final": 0.6},
            repeats=1,
            learner={"epochs": 2, "batch_size": 8},
            seed=3,
        )
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out_dir = tmp_path / "out"
        code, out, _ = run_cli(capsys, "simulate", "--config", str(cfg_path),
                               "--out-dir", str(out_dir))
        assert code == 0
        for name in ("report.csv", "report.json", "summary.csv"):
            assert (out_dir / name).exists()
            assert name in out

    def test_bad_config_exits_one(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"task": "nope"}))
        code, _, err = run_cli(capsys, "simulate", "--config", str(cfg_path))
        assert code == 1
        assert "error" in err

    def test_seed_override_changes_report(self, tmp_path, capsys):
        cfg = dict(
            task="classification",
            dataset={"n_classes": 2, "train_per_class": 10, "test_per_class": 5,
                     "image_size": 4},
            strategies=["random"],
            schedule={"initial": 0.3, "step": 0.3, "final": 0.6},
            repeats=1,
            learner={"epochs": 2},
            seed=3,
        )
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        a, b = tmp_path / "a", tmp_path / "b"
        run_cli(capsys, "simulate", "--config", str(cfg_path), "--out-dir", str(a))
        run_cli(capsys, "simulate", "--config", str(cfg_path), "--out-dir", str(b),
                "--seed", "17")
        ja = json.loads((a / "report.json").read_text())
        jb = json.loads((b / "report.json").read_text())
        assert ja["config"]["seed"] == 3
        assert jb["config"]["seed"] == 17
        assert ja["rows"] != jb["rows"]
