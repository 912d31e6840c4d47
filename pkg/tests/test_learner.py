"""Online large-margin updates, averaging, and model serialization."""

import logging
import random

import numpy as np
import pytest

from tagsel.learner import (
    ModelFormatError,
    TrainConfig,
    WeightStore,
    load_model,
    save_model,
)


class TestScore:
    def test_zero_weights_score_zero(self):
        ws = WeightStore(["N", "V"])
        assert ws.score([1, 2, 3], "N") == 0.0
        assert ws.score([], "V") == 0.0

    def test_single_feature_weight(self):
        ws = WeightStore(["N", "V"])
        # one unclipped update plants exactly +2.5 on key 7 for class N
        tau = ws.mira_update([7], [], "N", "V", loss=2.5, C=5.0)
        assert tau == pytest.approx(2.5)
        assert ws.score([7], "N") == pytest.approx(2.5)

    def test_two_feature_sum(self):
        ws = WeightStore(["A", "B"])
        ws.mira_update([1], [], "A", "B", loss=10.0, C=1.0)      # w[A][1] = +1.0
        ws.mira_update([], [2], "B", "A", loss=10.0, C=0.25)     # w[A][2] = -0.25
        assert ws.score([1, 2], "A") == pytest.approx(0.75)

    def test_unknown_class(self):
        ws = WeightStore(["N"])
        with pytest.raises(KeyError):
            ws.score([1], "V")

    def test_duplicate_classes_rejected(self):
        with pytest.raises(ValueError):
            WeightStore(["N", "N"])


class TestMiraUpdate:
    def test_identical_prediction_no_change(self):
        ws = WeightStore(["N", "V"])
        tau = ws.mira_update([1, 2], [1, 2], "N", "N", loss=0.0)
        assert tau == 0.0
        assert ws.nonzero_count() == 0

    def test_disjoint_unit_features_tau_half(self):
        ws = WeightStore(["A", "B"])
        tau = ws.mira_update([1], [2], "A", "B", loss=1.0, C=1.0)
        assert tau == pytest.approx(0.5)
        margin = ws.score([1], "A") - ws.score([2], "B")
        assert margin == pytest.approx(2 * tau)

    def test_clipping_at_C(self):
        ws = WeightStore(["A", "B"])
        tau = ws.mira_update([1], [2], "A", "B", loss=100.0, C=0.3)
        assert tau == pytest.approx(0.3)

    def test_margin_reaches_loss_when_unclipped(self):
        rng = random.Random(7)
        for _ in range(200):
            ws = WeightStore(["A", "B", "C"])
            gold = [rng.randrange(50) for _ in range(rng.randint(1, 6))]
            pred = [rng.randrange(50) for _ in range(rng.randint(1, 6))]
            g, p = "A", "B"
            loss = rng.uniform(0.1, 3.0)
            tau = ws.mira_update(gold, pred, g, p, loss, C=1e9)
            if tau == 0.0:
                continue
            margin = ws.score(gold, g) - ws.score(pred, p)
            assert margin >= loss - 1e-9
            assert margin == pytest.approx(loss, abs=1e-9)

    def test_no_op_when_margin_already_exceeds_loss(self):
        ws = WeightStore(["A", "B"])
        ws.mira_update([1], [2], "A", "B", loss=1.0, C=10.0)
        before = ws.score([1], "A")
        tau = ws.mira_update([1], [2], "A", "B", loss=1.0, C=10.0)
        assert tau == 0.0
        assert ws.score([1], "A") == before

    def test_degenerate_identical_features_warns_once(self, caplog):
        ws = WeightStore(["A", "B"])
        with caplog.at_level(logging.WARNING, logger="tagsel.learner"):
            tau = ws.mira_update([1, 2], [1, 2], "A", "A", loss=1.0)
            assert tau == 0.0
            ws.mira_update([1, 2], [1, 2], "A", "A", loss=1.0)
        warnings = [r for r in caplog.records if r.levelno == logging.WARNING]
        assert len(warnings) == 1
        assert "degenerate" in warnings[0].message
        assert ws.nonzero_count() == 0

    def test_frozen_store_rejects_updates(self):
        ws = WeightStore(["A"]).average_and_freeze()
        with pytest.raises(RuntimeError):
            ws.mira_update([1], [2], "A", "A", loss=1.0)
        with pytest.raises(RuntimeError):
            ws.tick()


class TestAveraging:
    def test_update_halfway_averages_to_half(self):
        N = 50
        ws = WeightStore(["A", "B"])
        for _ in range(N):
            ws.tick()
        ws.tick()
        ws.mira_update([9], [], "A", "B", loss=1.0, C=1.0)  # weight becomes 1.0
        for _ in range(N - 1):
            ws.tick()
        avg = ws.average_and_freeze()
        assert avg.score([9], "A") == pytest.approx(0.5)

    def test_zero_updates_zero_model(self):
        ws = WeightStore(["A"])
        for _ in range(10):
            ws.tick()
        avg = ws.average_and_freeze()
        assert avg.score([1, 2, 3], "A") == 0.0
        assert avg.nonzero_count() == 0

    def test_averaging_idempotent(self):
        ws = WeightStore(["A", "B"])
        rng = random.Random(3)
        for _ in range(30):
            ws.tick()
            ws.mira_update(
                [rng.randrange(20)], [rng.randrange(20)], "A", "B",
                loss=rng.uniform(0.1, 1.0),
            )
        once = ws.average_and_freeze()
        twice = once.average_and_freeze()
        assert set(once._w) == set(twice._w)
        for k in once._w:
            assert np.array_equal(once._w[k], twice._w[k])


class TestSerialization:
    def _trained_store(self, seed=1):
        ws = WeightStore(["N", "V", "A"])
        rng = random.Random(seed)
        for _ in range(60):
            ws.tick()
            ws.mira_update(
                [rng.randrange(100) for _ in range(3)],
                [rng.randrange(100) for _ in range(3)],
                rng.choice(["N", "V", "A"]),
                rng.choice(["N", "V", "A"]),
                loss=rng.uniform(0, 2),
            )
        return ws.average_and_freeze()

    def test_round_trip_scores_identical(self, tmp_path):
        ws = self._trained_store()
        path = tmp_path / "m.bin"
        save_model(path, {"kind": "test", "classes": list(ws.classes)}, {"main": ws})
        meta, sections = load_model(path)
        loaded = sections["main"]
        rng = random.Random(11)
        for _ in range(100):
            feats = [rng.randrange(100) for _ in range(rng.randint(0, 6))]
            for cls in ws.classes:
                assert loaded.score(feats, cls) == ws.score(feats, cls)
        assert meta["kind"] == "test"

    def test_version_mismatch_rejected(self, tmp_path):
        import struct

        from tagsel.learner import MAGIC

        ws = self._trained_store()
        path = tmp_path / "m.bin"
        save_model(path, {"classes": list(ws.classes)}, {"main": ws})
        blob = bytearray(path.read_bytes())
        blob[len(MAGIC):len(MAGIC) + 4] = struct.pack("<I", 999)
        path.write_bytes(bytes(blob))
        with pytest.raises(ModelFormatError, match="version"):
            load_model(path)

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "m.bin"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ModelFormatError, match="magic"):
            load_model(path)

    def test_truncated_file_rejected(self, tmp_path):
        ws = self._trained_store()
        path = tmp_path / "m.bin"
        save_model(path, {"classes": list(ws.classes)}, {"main": ws})
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(ModelFormatError):
            load_model(path)


class TestSeparableToy:
    def test_converges_within_five_epochs(self):
        # two classes, disjoint indicative feature per class
        data = [([k], "X") for k in range(10)] + [([k + 100], "Y") for k in range(10)]
        ws = WeightStore(["X", "Y"])
        classes = ["X", "Y"]
        for epoch in range(5):
            errors = 0
            for feats, gold in data:
                ws.tick()
                pred = max(classes, key=lambda c: (ws.score(feats, c), -classes.index(c)))
                if pred != gold:
                    errors += 1
                    ws.mira_update(feats, feats, gold, pred, loss=1.0)
            if errors == 0:
                break
        final_errors = sum(
            1
            for feats, gold in data
            if max(classes, key=lambda c: (ws.score(feats, c), -classes.index(c))) != gold
        )
        assert final_errors == 0
        assert epoch < 5
