from __future__ import annotations

import csv

import numpy as np
import pytest

from robustfactors.elliptical import RngStream
from robustfactors.estimators import EstimatorConfig, estimate_many
from robustfactors.montecarlo import generate_panel, make_scenario
from robustfactors.panel import DataPanel
from robustfactors.rolling import rolling_estimate, write_rolling_csv


def two_configs(k_max=4):
    return {
        "mker": EstimatorConfig(method="mker", k_max=k_max),
        "er": EstimatorConfig(method="er", k_max=k_max),
    }


class TestRollingMechanics:
    def test_full_window_equals_whole_panel_estimate(self, rng):
        panel = DataPanel(rng.standard_normal((40, 12)))
        configs = two_configs()
        result = rolling_estimate(panel, window=40, configs=configs)
        whole = estimate_many(panel, configs)
        assert len(result.series) == 2
        assert result.series[0] == ("40", "mker", whole["mker"].r_hat)
        assert result.series[1] == ("40", "er", whole["er"].r_hat)

    def test_window_count_and_labels(self, rng):
        panel = DataPanel(rng.standard_normal((40, 10)))
        result = rolling_estimate(panel, window=20, configs=two_configs())
        assert result.window == 20
        assert result.start_index == 20
        path = result.by_method("mker")
        assert len(path) == 21
        assert [label for label, _ in path] == [str(i) for i in range(20, 41)]

    def test_custom_time_labels_used(self, rng):
        labels = [f"2001-{m:02d}" for m in range(1, 13)]
        panel = DataPanel(rng.standard_normal((12, 8)), time_labels=labels)
        result = rolling_estimate(panel, window=6, configs=two_configs())
        assert [label for label, _ in result.by_method("er")] == labels[5:]

    def test_each_window_matches_direct_estimate(self, rng):
        panel = DataPanel(rng.standard_normal((25, 9)))
        configs = two_configs(k_max=3)
        result = rolling_estimate(panel, window=10, configs=configs)
        for end in (9, 17, 24):
            sub = DataPanel(panel.values[end - 9 : end + 1])
            direct = estimate_many(sub, configs)
            label = str(end + 1)
            got = {m: r for lab, m, r in result.series if lab == label}
            assert got == {m: res.r_hat for m, res in direct.items()}

    def test_locality(self, rng):
        values = rng.standard_normal((30, 8))
        panel_a = DataPanel(values)
        values_b = values.copy()
        values_b[29] += 50.0
        panel_b = DataPanel(values_b)
        configs = two_configs(k_max=3)
        ra = rolling_estimate(panel_a, window=10, configs=configs)
        rb = rolling_estimate(panel_b, window=10, configs=configs)
        # all windows that end before the modified row agree
        assert ra.series[: 2 * 20] == rb.series[: 2 * 20]

    def test_progress_callback(self, rng):
        panel = DataPanel(rng.standard_normal((14, 8)))
        calls = []
        rolling_estimate(
            panel, window=12, configs=two_configs(),
            progress=lambda k, n: calls.append((k, n)),
        )
        assert calls == [(1, 3), (2, 3), (3, 3)]


class TestRollingStatistics:
    def test_constant_factor_count_recovered(self):
        spec = make_scenario("A", dist="gaussian", N=50, T=300, reps=1)
        panel = generate_panel(spec, 0, RngStream(20260819, 0))
        result = rolling_estimate(
            panel, window=150, configs={"mker": EstimatorConfig(method="mker")}
        )
        path = result.by_method("mker")
        assert len(path) == 151
        hits = sum(r == 3 for _, r in path)
        assert hits >= 0.95 * len(path)

    def test_per_window_demeaning_absorbs_level_shifts(self, rng):
        spec = make_scenario("A", dist="gaussian", N=30, T=60, reps=1)
        panel = generate_panel(spec, 0, RngStream(4, 0))
        shifted = DataPanel(panel.values + 100.0)
        cfg = {"mker": EstimatorConfig(method="mker", k_max=4)}
        a = rolling_estimate(panel, window=30, configs=cfg)
        b = rolling_estimate(shifted, window=30, configs=cfg)
        assert a.series == b.series


class TestRollingValidation:
    def test_window_bounds(self, rng):
        panel = DataPanel(rng.standard_normal((20, 8)))
        with pytest.raises(ValueError, match="window must be >= 2"):
            rolling_estimate(panel, window=1, configs=two_configs())
        with pytest.raises(ValueError, match="exceeds panel length"):
            rolling_estimate(panel, window=21, configs=two_configs())
        with pytest.raises(ValueError, match="too small for k_max"):
            rolling_estimate(panel, window=5, configs=two_configs(k_max=8))

    def test_missing_entries_rejected(self, rng):
        values = rng.standard_normal((20, 8))
        values[5, 2] = np.nan
        panel = DataPanel(values, missing_mask=np.isnan(values))
        with pytest.raises(ValueError, match="impute"):
            rolling_estimate(panel, window=10, configs=two_configs())


class TestRollingCsv:
    def test_schema_and_roundtrip(self, rng, tmp_path):
        panel = DataPanel(rng.standard_normal((16, 8)))
        result = rolling_estimate(panel, window=10, configs=two_configs(k_max=3))
        path = tmp_path / "rolling.csv"
        write_rolling_csv(result, path)
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 7
        mker_path = dict(result.by_method("mker"))
        er_path = dict(result.by_method("er"))
        for row in rows:
            assert int(row["mker"]) == mker_path[row["time_label"]]
            assert int(row["er"]) == er_path[row["time_label"]]

    def test_duplicate_labels_keep_one_row_each(self, rng, tmp_path):
        labels = ["same"] * 12
        panel = DataPanel(rng.standard_normal((12, 8)), time_labels=labels)
        result = rolling_estimate(panel, window=8, configs=two_configs(k_max=3))
        path = tmp_path / "dup.csv"
        write_rolling_csv(result, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 1 + 5
