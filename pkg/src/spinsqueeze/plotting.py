"""Self-contained SVG line and scatter plots for the CLI outputs."""
from __future__ import annotations

__all__ = ["line_plot_svg", "scatter_plot_svg"]


def _axes(title, xlabel, ylabel):
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return fig, ax


def line_plot_svg(path, x, series: dict, xlabel: str, ylabel: str,
                  title: str | None = None, hlines: dict | None = None) -> None:
    fig, ax = _axes(title, xlabel, ylabel)
    for label, y in series.items():
        ax.plot(x, y, marker="o", ms=3, lw=1.2, label=label)
    for label, y in (hlines or {}).items():
        ax.axhline(y, ls="--", color="k", alpha=0.6, label=label)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    _close(fig)


def scatter_plot_svg(path, points, xlabel: str, ylabel: str,
                     title: str | None = None) -> None:
    fig, ax = _axes(title, xlabel, ylabel)
    ax.plot(points[:, 0], points[:, 1], ".", ms=2, alpha=0.5)
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    _close(fig)


def _close(fig):
    import matplotlib.pyplot as plt

    plt.close(fig)
