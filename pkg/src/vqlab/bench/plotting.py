"""Figure emission: metric-versus-iteration curves, one per algorithm."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import EmptyTracesError, MixedMetricsError
from ..metrics import MetricTrace


def _load_traces(trace_files) -> list[MetricTrace]:
    traces = [MetricTrace.from_csv(path) for path in trace_files]
    if not traces:
        raise EmptyTracesError("no traces to plot")
    return traces


def emit_plot(trace_files, output_path, log_y: bool = True, title: str | None = None) -> Path:
    """Render trace CSVs as one SVG: median-over-seeds curve per algorithm.

    All traces must carry the same metric name; the config digest of the
    first trace is stamped in the footer.
    """
    traces = _load_traces(trace_files)
    metrics = {name for trace in traces for name in trace.metric_names()}
    if len(metrics) != 1:
        raise MixedMetricsError(f"traces mix metrics: {sorted(metrics)}")
    metric = metrics.pop()

    by_algorithm: dict[str, list[MetricTrace]] = {}
    for trace in traces:
        by_algorithm.setdefault(trace.metadata.get("algorithm", "?"), []).append(trace)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for algorithm, group in by_algorithm.items():
        iterations, _ = group[0].values(metric)
        stacked = np.vstack([t.values(metric)[1] for t in group])
        median = np.median(stacked, axis=0)
        ax.plot(iterations, median, label=algorithm, linewidth=1.4)
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel(metric)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    digest = traces[0].metadata.get("config_digest", "")
    if digest:
        fig.text(0.99, 0.01, f"config {digest}", ha="right", fontsize=7, color="0.4")
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output_path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return output_path
