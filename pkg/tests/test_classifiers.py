import numpy as np
import pytest

from graphquant.classifiers import (enq_predict, label_prop_predict, load_predictions,
                                    save_predictions)
from graphquant.errors import DataError
from graphquant.graph import Graph


class TestEnq:
    def test_labeled_neighbor_histogram(self):
        # vertex 0 has labeled neighbors of classes {0, 0, 1}
        g = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        preds = enq_predict(g, [1, 2, 3], [0, 0, 1], num_classes=2)
        assert np.allclose(preds.soft[0], [2 / 3, 1 / 3])
        assert preds.hard[0] == 0

    def test_isolated_vertex_gets_global_histogram(self):
        g = Graph.from_edges(3, [(0, 1)])
        preds = enq_predict(g, [0, 1], [0, 1], num_classes=2)
        assert np.allclose(preds.soft[2], [0.5, 0.5])
        assert preds.hard[2] == 0  # tie breaks to the lowest index

    def test_single_class_training(self):
        g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        preds = enq_predict(g, [0, 1, 2, 3], [1, 1, 1, 1], num_classes=2)
        assert np.array_equal(preds.hard, [1, 1, 1, 1])

    def test_unlabeled_neighbors_ignored(self):
        # vertex 0 neighbors: labeled 1 (class 1) and unlabeled 2
        g = Graph.from_edges(3, [(0, 1), (0, 2)])
        preds = enq_predict(g, [1], [1], num_classes=2)
        assert np.array_equal(preds.soft[0], [0.0, 1.0])

    def test_rows_on_simplex(self):
        rng = np.random.default_rng(0)
        g = Graph.from_edges(30, [(i, (i + 1) % 30) for i in range(30)])
        train = rng.choice(30, size=10, replace=False)
        preds = enq_predict(g, train, rng.integers(0, 3, size=10), num_classes=3)
        assert np.abs(preds.soft.sum(axis=1) - 1.0).max() < 1e-9
        assert np.array_equal(preds.hard, np.argmax(preds.soft, axis=1))

    def test_empty_training_rejected(self):
        g = Graph.from_edges(2, [(0, 1)])
        with pytest.raises(DataError):
            enq_predict(g, [], [], num_classes=2)


class TestLabelProp:
    def test_zero_iterations_is_initialization(self):
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        preds = label_prop_predict(g, [0], [1], iterations=0, num_classes=2)
        assert np.array_equal(preds.soft[0], [0.0, 1.0])
        assert np.allclose(preds.soft[1], [0.5, 0.5])

    def test_symmetric_midpoint(self):
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        preds = label_prop_predict(g, [0, 2], [0, 1], iterations=200, num_classes=2)
        assert np.allclose(preds.soft[1], [0.5, 0.5], atol=1e-9)

    def test_train_vertices_stay_clamped(self):
        g = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
        train = [0, 2, 4]
        labels = [0, 1, 0]
        preds = label_prop_predict(g, train, labels, iterations=37, num_classes=2)
        assert np.array_equal(preds.hard[train], labels)
        for v, y in zip(train, labels):
            assert preds.soft[v, y] == 1.0

    def test_rows_stay_on_simplex(self):
        rng = np.random.default_rng(1)
        edges = [(i, j) for i in range(20) for j in range(i + 1, 20) if rng.random() < 0.2]
        g = Graph.from_edges(20, edges)
        preds = label_prop_predict(g, [0, 1, 2], [0, 1, 2], iterations=13, num_classes=3)
        assert np.abs(preds.soft.sum(axis=1) - 1.0).max() < 1e-9
        assert preds.soft.min() >= 0.0

    def test_deterministic(self):
        g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
        a = label_prop_predict(g, [0, 5], [0, 1], iterations=10, num_classes=2)
        b = label_prop_predict(g, [0, 5], [0, 1], iterations=10, num_classes=2)
        assert np.array_equal(a.soft, b.soft)


class TestPredictionFiles:
    def test_hard_rows(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("1\n0\n")
        preds = load_predictions(path, n=2, K=2)
        assert list(preds.hard) == [1, 0]
        assert preds.soft is None

    def test_soft_rows_argmax(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("0.7,0.3\n0.2,0.8\n")
        preds = load_predictions(path, n=2, K=2)
        assert np.allclose(preds.soft[0], [0.7, 0.3])
        assert list(preds.hard) == [0, 1]

    def test_non_simplex_row_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("0.5,0.6\n0.5,0.5\n")
        with pytest.raises(DataError, match=":1"):
            load_predictions(path, n=2, K=2)

    def test_small_drift_renormalized(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("0.5000001,0.5\n0.5,0.5\n")
        preds = load_predictions(path, n=2, K=2)
        assert preds.soft[0].sum() == pytest.approx(1.0, abs=1e-12)

    def test_row_count_mismatch(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("1\n")
        with pytest.raises(DataError):
            load_predictions(path, n=2, K=2)

    def test_arity_mismatch(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("0.5,0.3,0.2\n0.1,0.8,0.1\n")
        with pytest.raises(DataError):
            load_predictions(path, n=2, K=2)

    def test_out_of_range_hard_label(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("0\n5\n")
        with pytest.raises(DataError, match=":2"):
            load_predictions(path, n=2, K=2)

    def test_round_trip_soft(self, tmp_path):
        rng = np.random.default_rng(2)
        soft = rng.dirichlet(np.ones(3), size=10)
        from graphquant.estimation import PredictionSet
        preds = PredictionSet.from_soft(soft)
        save_predictions(preds, tmp_path / "p.csv")
        loaded = load_predictions(tmp_path / "p.csv", n=10, K=3)
        assert np.array_equal(loaded.soft, preds.soft)
        assert np.array_equal(loaded.hard, preds.hard)

    def test_round_trip_hard(self, tmp_path):
        from graphquant.estimation import PredictionSet
        preds = PredictionSet.from_hard([0, 2, 1, 1], K=3)
        save_predictions(preds, tmp_path / "p.csv")
        loaded = load_predictions(tmp_path / "p.csv", n=4, K=3)
        assert np.array_equal(loaded.hard, preds.hard)
