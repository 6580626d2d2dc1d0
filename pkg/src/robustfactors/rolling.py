"""Rolling-window factor-count estimation over a time-indexed panel."""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .estimators import estimate_many
from .panel import DataPanel

__all__ = ["RollingResult", "rolling_estimate", "write_rolling_csv"]


@dataclass(frozen=True)
class RollingResult:
    """Per-window estimates: series holds (time_label, method, r_hat) rows."""

    series: list[tuple[str, str, int]]
    window: int
    start_index: int
    methods: tuple[str, ...]

    def by_method(self, method: str) -> list[tuple[str, int]]:
        """The (time_label, r_hat) path of one method."""
        return [(label, r) for label, m, r in self.series if m == method]


def rolling_estimate(panel: DataPanel, window: int, configs, workers=None, progress=None) -> RollingResult:
    """Estimate the factor count on every length-``window`` trailing window.

    The panel must be complete (impute first). Windows end at observations
    window, window + 1, ..., T (1-based), giving T - window + 1 entries per
    method; each window is demeaned on its own per the configs. start_index
    is the 1-based time index of the first full window's endpoint.
    """
    if panel.has_missing:
        raise ValueError("panel has missing entries; impute before rolling estimation")
    T = panel.shape[0]
    if window < 2:
        raise ValueError("window must be >= 2")
    if window > T:
        raise ValueError(f"window {window} exceeds panel length {T}")
    need = max(cfg.k_max for cfg in configs.values()) + 2
    if window < need:
        raise ValueError(f"window {window} too small for k_max; need at least {need}")

    labels = panel.time_labels
    series: list[tuple[str, str, int]] = []
    n_windows = T - window + 1
    for end in range(window - 1, T):
        sub = DataPanel(panel.values[end - window + 1 : end + 1])
        results = estimate_many(sub, configs, workers=workers)
        label = labels[end] if labels is not None else str(end + 1)
        for name, res in results.items():
            series.append((label, name, res.r_hat))
        if progress is not None:
            progress(end - window + 2, n_windows)
    return RollingResult(
        series=series, window=window, start_index=window, methods=tuple(configs)
    )


def write_rolling_csv(result: RollingResult, path) -> None:
    """CSV with a time_label column and one integer column per method."""
    step = len(result.methods)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_label", *result.methods])
        for i in range(0, len(result.series), step):
            chunk = result.series[i : i + step]
            values = {m: r for _, m, r in chunk}
            writer.writerow([chunk[0][0], *(values[m] for m in result.methods)])
