"""Figures that accompany CLI reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_RC = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "influence",
}


def _metadata(path: str):
    # drop timestamps and version strings so figures are byte-reproducible
    suffix = path.rsplit(".", 1)[-1].lower()
    if suffix == "png":
        return {"Software": None}
    if suffix == "svg":
        return {"Date": None, "Creator": None}
    if suffix == "pdf":
        return {"CreationDate": None, "Creator": None, "Producer": None}
    return None


def _bars(ax, report, title):
    names = [f["name"] for f in report["features"]]
    vals = [f["normalized"] for f in report["features"]]
    ax.bar(names, vals, color="#4c72b0")
    errs = report.get("estimates")
    if errs:
        ax.errorbar(names, vals, yerr=[errs[n]["half_width"] / errs[n]["scale"] for n in names],
                    fmt="none", ecolor="k", capsize=3)
    ax.set_ylabel("influence")
    ax.set_title(title)


def plot_report(report: dict, path) -> None:
    """Bar chart of feature influence; pipeline reports also get per-item distributions."""
    with plt.rc_context(_RC):
        items = report.get("items") or []
        if items:
            fig, (left, right) = plt.subplots(1, 2, figsize=(8, 3.2))
            _bars(left, report, "vector influence")
            names = [f["name"] for f in report["features"]]
            data = [[it["influence"][n] for it in items] for n in names]
            right.boxplot(data, showfliers=False)
            right.set_xticks(range(1, len(names) + 1), names)
            for k, col in enumerate(data, start=1):
                right.scatter([k] * len(col), col, s=8, alpha=0.6, color="#dd8452", zorder=3)
            right.set_title("per-item influence")
        else:
            fig, ax = plt.subplots(figsize=(4.5, 3.2))
            _bars(ax, report, report["measure"])
        fig.tight_layout()
        fig.savefig(path, metadata=_metadata(str(path)))
        plt.close(fig)
