import csv
import math

import numpy as np
import pytest

from tls_spectro.errors import DegenerateColumn, IndexMismatch
from tls_spectro.evaluation import (
    PredictionTable,
    denormalize_labels,
    error_vs_detuning,
    mse,
    mse_report,
    normalize_labels,
    read_predictions_csv,
    scatter_export,
    write_predictions_csv,
)


def _labels(n=10, seed=0):
    rng = np.random.default_rng(seed)
    Q = np.column_stack(
        [
            rng.uniform(6.75, 7.25, n),
            rng.uniform(0.005, 0.05, n),
            rng.uniform(500, 10000, n),
            rng.uniform(500, 20000, n),
        ]
    )
    return np.arange(n), Q


class TestNormalization:
    def test_endpoints_and_midpoint(self):
        Q = np.array([[0.0, 10.0], [5.0, 20.0], [10.0, 30.0]])
        Qn, bounds = normalize_labels(Q[:, [0, 1, 0, 1]])
        assert Qn.min() == pytest.approx(1.0)
        assert Qn.max() == pytest.approx(10.0)
        assert Qn[1, 0] == pytest.approx(5.5)

    def test_round_trip_identity(self):
        _, Q = _labels(50)
        Qn, bounds = normalize_labels(Q)
        back = denormalize_labels(Qn, bounds)
        # machine-precision identity, relative to the column magnitudes
        assert (np.abs(back - Q) / np.abs(Q)).max() < 1e-12

    def test_out_of_bounds_values_stay_visible(self):
        _, Q = _labels(20)
        _, bounds = normalize_labels(Q)
        beyond = Q.max(axis=0) * 1.5
        Qn, _ = normalize_labels(beyond[None, :], bounds)
        assert (Qn > 10).all()  # no clamping

    def test_degenerate_column(self):
        Q = np.ones((5, 4))
        with pytest.raises(DegenerateColumn):
            normalize_labels(Q)


class TestMse:
    def test_perfect_predictions(self):
        idx, Q = _labels()
        table = PredictionTable(indices=idx, Q_hat=Q.copy(), source="cnn")
        out = mse(table, idx, Q)
        assert np.allclose(out["per_param"], 0.0)
        assert out["combined"] == 0.0

    def test_unit_errors_single_sample(self):
        idx = np.array([0])
        Q = np.array([[7.0, 0.02, 1000.0, 2000.0]])
        table = PredictionTable(indices=idx, Q_hat=Q + 1.0, source="cnn")
        out = mse(table, idx, Q)
        assert np.allclose(out["per_param"], 1.0)
        assert out["combined"] == pytest.approx(1.0)

    def test_combined_is_mean_of_per_param(self):
        idx, Q = _labels(30, seed=3)
        rng = np.random.default_rng(4)
        table = PredictionTable(
            indices=idx, Q_hat=Q + rng.normal(size=Q.shape), source="cnn"
        )
        out = mse(table, idx, Q)
        assert out["combined"] == pytest.approx(out["per_param"].mean())

    def test_row_permutation_invariance(self):
        idx, Q = _labels(12, seed=5)
        rng = np.random.default_rng(6)
        Q_hat = Q + rng.normal(size=Q.shape)
        table = PredictionTable(indices=idx, Q_hat=Q_hat, source="cnn")
        direct = mse(table, idx, Q)
        perm = rng.permutation(12)
        shuffled = PredictionTable(indices=idx[perm], Q_hat=Q_hat[perm], source="cnn")
        same = mse(shuffled, idx, Q)
        assert np.allclose(direct["per_param"], same["per_param"])

    def test_partial_predictions(self):
        idx, Q = _labels(8)
        Q_hat = Q.copy()
        Q_hat[:, 2:] = math.nan  # analytic estimates cover only nu and g
        table = PredictionTable(indices=idx, Q_hat=Q_hat, source="analytic")
        out = mse(table, idx, Q)
        assert out["per_param"][0] == 0.0
        assert math.isnan(out["per_param"][2])
        assert math.isnan(out["combined"])
        report = mse_report({"analytic/raw": out})
        assert "absent" in report

    def test_normalized_scale(self):
        idx, Q = _labels(15, seed=9)
        table = PredictionTable(indices=idx, Q_hat=Q.copy(), source="cnn")
        out = mse(table, idx, Q, scale="normalized")
        assert np.allclose(out["per_param"], 0.0)

    def test_unknown_index_raises(self):
        idx, Q = _labels(5)
        table = PredictionTable(
            indices=np.array([0, 1, 99]), Q_hat=Q[:3], source="cnn"
        )
        with pytest.raises(IndexMismatch):
            mse(table, idx, Q)


class TestErrorVsDetuning:
    def test_inverse_error_gives_decreasing_medians(self):
        detunings = np.linspace(0.02, 0.25, 200)
        errors = 1.0 / detunings
        out = error_vs_detuning(detunings, errors, n_bins=5)
        medians = [b["median"] for b in out["bins"]]
        assert all(a > b for a, b in zip(medians, medians[1:]))
        assert out["spearman"] == pytest.approx(-1.0)

    def test_constant_errors_zero_correlation(self):
        detunings = np.linspace(0.02, 0.25, 50)
        out = error_vs_detuning(detunings, np.ones(50), n_bins=4)
        assert out["spearman"] == 0.0

    def test_single_bin_rejected(self):
        with pytest.raises(ValueError):
            error_vs_detuning(np.full(10, 0.1), np.ones(10), n_bins=3)


class TestCsvInterfaces:
    def test_scatter_export_schema(self, tmp_path):
        idx, Q = _labels(6)
        table = PredictionTable(indices=idx, Q_hat=Q.copy(), source="cnn")
        path = tmp_path / "scatter.csv"
        scatter_export(table, idx, Q, path)
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4 * 6
        for row in rows:
            assert float(row["target"]) == float(row["prediction"])

    def test_scatter_round_trip_exact(self, tmp_path):
        idx, Q = _labels(3, seed=11)
        rng = np.random.default_rng(12)
        table = PredictionTable(
            indices=idx, Q_hat=Q + rng.normal(size=Q.shape) * 1e-6, source="cnn"
        )
        path = tmp_path / "s.csv"
        scatter_export(table, idx, Q, path)
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        parsed = np.array([float(r["prediction"]) for r in rows]).reshape(3, 4)
        assert np.array_equal(parsed, table.Q_hat)

    def test_predictions_csv_round_trip(self, tmp_path):
        idx, Q = _labels(5, seed=2)
        bounds = (Q.min(axis=0), Q.max(axis=0))
        table = PredictionTable(indices=idx, Q_hat=Q * 1.01, source="cnn",
                                bounds=bounds)
        path = tmp_path / "pred.csv"
        write_predictions_csv(table, path)
        back = read_predictions_csv(path)
        assert np.array_equal(back.indices, table.indices)
        assert np.array_equal(back.Q_hat, table.Q_hat)
        assert back.source == "cnn"
        assert np.array_equal(back.bounds[0], bounds[0])
