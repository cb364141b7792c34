import json

import numpy as np
import pytest

from oracles import oracle_dispersion, oracle_entropy
from pcdal import (DISPERSION_KINDS, DispersionFn, Perturbation,
                   PerturbationSet, PredictionSet, ScoreError, ScoreRecord,
                   ShapeError, apply, classification_score, entropy_score,
                   mean_prediction, prediction_roles, score_batch, score_set,
                   segmentation_score, softmax, write_tensor)


def random_set(rng, task, n_classes, n_members, spatial=()):
    members = []
    for i in range(n_members):
        logits = rng.normal(size=(n_classes,) + spatial) * 2.0
        members.append((f"m{i}", softmax(logits, axis=0)))
    return PredictionSet("s0", members, task)


class TestWorkedExamples:
    def test_one_hot_disagreement(self):
        s = PredictionSet("a", [
            ("identity", np.array([1.0, 0.0])),
            ("flip_h", np.array([0.0, 1.0])),
        ], "classification")
        assert classification_score(s).score == 0.25

    def test_soft_disagreement(self):
        s = PredictionSet("b", [
            ("identity", np.array([0.8, 0.2])),
            ("flip_h", np.array([0.6, 0.4])),
        ], "classification")
        assert abs(classification_score(s).score - 0.01) < 1e-15

    def test_two_pixel_map(self):
        m1 = np.array([[[1.0, 1.0]], [[0.0, 0.0]]])
        m2 = np.array([[[1.0, 0.0]], [[0.0, 1.0]]])
        s = PredictionSet("c", [("identity", m1), ("flip_h", m2)], "segmentation-2d")
        assert segmentation_score(s).score == 0.125


class TestZeroScoreLaw:
    def test_identical_members_score_exactly_zero(self):
        rng = np.random.default_rng(5)
        for dtype in (np.float32, np.float64):
            for m in (2, 3, 5):
                p = softmax(rng.normal(size=(3, 4, 4)), axis=0).astype(dtype)
                s = PredictionSet(
                    "z", [(f"m{i}", p.copy()) for i in range(m)], "segmentation-2d")
                for kind in ("mse", "l1", "kl"):
                    f = DispersionFn(kind=kind)
                    assert segmentation_score(s, f).score == 0.0, (kind, dtype, m)

    def test_mean_prediction_pins_agreement(self):
        # Three equal f64 values can drift under naive averaging; ours must not.
        v = np.array([0.1, 0.9])
        s = PredictionSet("p", [("a", v), ("b", v.copy()), ("c", v.copy())],
                          "classification")
        assert np.array_equal(mean_prediction(s), v)


class TestOracleAgreement:
    def test_all_kinds_match_oracle(self):
        rng = np.random.default_rng(6)
        shapes = {"classification": (), "segmentation-2d": (3, 4), "segmentation-3d": (2, 3, 2)}
        for task, spatial in shapes.items():
            for kind in DISPERSION_KINDS:
                f = DispersionFn(kind=kind, delta=0.05, margin=0.02)
                for _ in range(5):
                    s = random_set(rng, task, int(rng.integers(2, 6)),
                                   int(rng.integers(2, 5)), spatial)
                    got = score_set(s, f).score
                    want = oracle_dispersion(s.stacked(), kind, delta=0.05, margin=0.02)
                    assert got == pytest.approx(want, rel=1e-9, abs=1e-12), (task, kind)

    def test_kl_nonnegative(self):
        rng = np.random.default_rng(7)
        f = DispersionFn(kind="kl")
        for _ in range(50):
            s = random_set(rng, "classification", 4, 3)
            assert classification_score(s, f).score >= 0.0


class TestSpatialInvariance:
    def test_common_flip_leaves_score_unchanged(self):
        rng = np.random.default_rng(8)
        roles = prediction_roles("segmentation-2d")
        flip = Perturbation("flip_h")
        for kind in DISPERSION_KINDS:
            f = DispersionFn(kind=kind)
            s = random_set(rng, "segmentation-2d", 3, 3, (4, 4))
            moved = PredictionSet("s0", [
                (n, apply(flip, t, roles)) for n, t in s.predictions], "segmentation-2d")
            assert abs(segmentation_score(s, f).score
                       - segmentation_score(moved, f).score) <= 1e-12


class TestValidation:
    def test_needs_two_members(self):
        with pytest.raises(ValueError):
            PredictionSet("x", [("identity", np.array([1.0, 0.0]))], "classification")

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            PredictionSet("x", [
                ("a", np.array([1.0, 0.0])),
                ("b", np.array([1.0, 0.0, 0.0])),
            ], "classification")

    def test_dtype_mismatch(self):
        with pytest.raises(ShapeError):
            PredictionSet("x", [
                ("a", np.array([1.0, 0.0], dtype=np.float32)),
                ("b", np.array([1.0, 0.0], dtype=np.float64)),
            ], "classification")

    def test_rank_must_match_task(self):
        with pytest.raises(ShapeError):
            PredictionSet("x", [
                ("a", np.ones((2, 2)) / 2.0),
                ("b", np.ones((2, 2)) / 2.0),
            ], "classification")

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            PredictionSet("x", [
                ("a", np.array([0.9, 0.3])),
                ("b", np.array([0.5, 0.5])),
            ], "classification")

    def test_task_kind_mismatch_on_score(self):
        rng = np.random.default_rng(9)
        s_cls = random_set(rng, "classification", 3, 2)
        s_seg = random_set(rng, "segmentation-2d", 3, 2, (2, 2))
        with pytest.raises(ValueError):
            segmentation_score(s_cls)
        with pytest.raises(ValueError):
            classification_score(s_seg)

    def test_dispersion_kind_checked(self):
        with pytest.raises(ValueError):
            DispersionFn(kind="cosine")
        with pytest.raises(ValueError):
            DispersionFn(kind="huber", delta=0.0)


class TestEntropy:
    def test_one_hot_is_exactly_zero(self):
        assert entropy_score(np.array([1.0, 0.0, 0.0])) == 0.0

    def test_uniform_is_ln_c(self):
        for c in (2, 3, 4, 8):
            got = entropy_score(np.full(c, 1.0 / c))
            assert got == pytest.approx(np.log(c), rel=1e-9)

    def test_map_matches_oracle(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            p = softmax(rng.normal(size=(3, 4, 5)), axis=0)
            assert entropy_score(p) == pytest.approx(oracle_entropy(p), rel=1e-12)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            entropy_score(np.array([0.7, 0.7]))


class TestBatchScoring:
    def _write_member(self, dirpath, name, arr):
        path = dirpath / name
        write_tensor(arr, path)
        return name

    def test_batch_with_realignment(self, tmp_path):
        rng = np.random.default_rng(11)
        roles = prediction_roles("segmentation-2d")
        flip = Perturbation("flip_h")
        aligned = softmax(rng.normal(size=(2, 3, 3)), axis=0)
        other = softmax(rng.normal(size=(2, 3, 3)), axis=0)
        # stored flipped, flagged unaligned: scoring must realign it back
        self._write_member(tmp_path, "id.ptns", aligned)
        self._write_member(tmp_path, "fl.ptns", apply(flip, other, roles))
        manifest = [{
            "sample_id": "s0",
            "task": "segmentation-2d",
            "predictions": [
                {"perturbation": "identity", "path": "id.ptns"},
                {"perturbation": "flip_h", "path": "fl.ptns", "realigned": False},
            ],
        }]
        pset = PerturbationSet.from_names(["identity", "flip_h"])
        out = score_batch(manifest, pset, base_dir=str(tmp_path))
        assert len(out) == 1
        direct = PredictionSet("s0", [("identity", aligned), ("flip_h", other)],
                               "segmentation-2d")
        assert out[0].score == segmentation_score(direct).score

    def test_batch_isolates_failures_and_keeps_order(self, tmp_path):
        arr = np.array([0.5, 0.5])
        self._write_member(tmp_path, "ok.ptns", arr)
        entries = []
        for sid, path in (("s0", "ok.ptns"), ("s1", "missing.ptns"), ("s2", "ok.ptns")):
            entries.append({
                "sample_id": sid,
                "task": "classification",
                "predictions": [
                    {"perturbation": "identity", "path": "ok.ptns"},
                    {"perturbation": "flip_h", "path": path},
                ],
            })
        pset = PerturbationSet.from_names(["identity", "flip_h"])
        out = score_batch(entries, pset, base_dir=str(tmp_path))
        assert [type(r) for r in out] == [ScoreRecord, ScoreError, ScoreRecord]
        assert [r.sample_id for r in out] == ["s0", "s1", "s2"]
        assert "missing" in out[1].error

    def test_batch_rejects_wrong_perturbation_list(self, tmp_path):
        arr = np.array([0.5, 0.5])
        self._write_member(tmp_path, "ok.ptns", arr)
        entry = {
            "sample_id": "s0",
            "task": "classification",
            "predictions": [
                {"perturbation": "identity", "path": "ok.ptns"},
                {"perturbation": "rot90", "path": "ok.ptns"},
            ],
        }
        pset = PerturbationSet.from_names(["identity", "flip_h"])
        out = score_batch([entry], pset, base_dir=str(tmp_path))
        assert isinstance(out[0], ScoreError)

    def test_manifest_must_be_array(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"sample_id": "s0"}))
        from pcdal import load_manifest
        with pytest.raises(ValueError):
            load_manifest(path)
