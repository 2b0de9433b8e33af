"""SVG figures of aggregated curves with confidence bands."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

METRICS = {"dist": "||x_t - x*||_2", "loss": "training loss"}


def emit_plot(aggregates, path, metric="dist", log_y=True, title=None):
    """Draw one mean curve with its band per aggregate, legend in input order.

    Output is deterministic: the SVG hash salt is fixed and no date is written.
    """
    aggregates = list(aggregates)
    if not aggregates:
        raise ValueError("nothing to plot")
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {tuple(METRICS)}")
    with plt.rc_context({"svg.hashsalt": "pilotlab", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for agg in aggregates:
            mean, lo, hi = agg.series(metric)
            (line,) = ax.plot(agg.time, mean, label=agg.label, lw=1.4)
            ax.fill_between(agg.time, lo, hi, color=line.get_color(), alpha=0.2, lw=0)
        if log_y:
            ax.set_yscale("log")
        ax.set_xlabel("time (steps x eta)")
        ax.set_ylabel(METRICS[metric])
        if title:
            ax.set_title(title)
        ax.legend(loc="best", fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
