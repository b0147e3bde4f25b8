"""Matplotlib rendering for experiment reports (static PNG files only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def line_plot(path: Path, title: str, xlabel: str, ylabel: str, series: dict,
              hlines=(), logx: bool = False) -> Path:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, (xs, ys) in series.items():
        ax.plot(xs, ys, marker="o", markersize=3, linewidth=1.2, label=label)
    for label, y in hlines:
        ax.axhline(y, linestyle="--", linewidth=0.9, color="gray")
        ax.annotate(label, (0.99, y), xycoords=("axes fraction", "data"),
                    ha="right", va="bottom", fontsize=8, color="gray")
    if logx:
        ax.set_xscale("log", base=2)
    ax.set_title(title, fontsize=11)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if series:
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def _table_series(report, table, xcol, ycols):
    headers, rows = report.tables[table]
    xi = headers.index(xcol)
    out = {}
    for ycol in ycols:
        yi = headers.index(ycol)
        pts = [(r[xi], r[yi]) for r in rows if r[yi] is not None and r[yi] == r[yi]]
        out[ycol] = ([p[0] for p in pts], [p[1] for p in pts])
    return out


def render_report_figures(report, outdir: Path) -> list[Path]:
    """One figure per table that has a natural plot; skips the rest."""
    outdir = Path(outdir)
    paths = []

    def emit(fname, *args, **kwargs):
        paths.append(line_plot(outdir / fname, *args, **kwargs))

    for name, (headers, rows) in report.tables.items():
        if not rows or len(headers) < 2:
            continue
        if name == "angle_spectrum":
            series = {}
            for col in range(2, len(headers)):
                ys = [r[col] for r in rows]
                series[headers[col]] = (list(range(1, len(ys) + 1)), ys)
            emit(f"{name}.png", f"{report.name}: angle spectra", "element index",
                 "angle (rad)", series)
            continue
        if not all(isinstance(r[0], (int, float)) and not isinstance(r[0], bool) for r in rows):
            continue
        ycols = [h for h, v in zip(headers[1:], rows[0][1:])
                 if isinstance(v, (int, float)) and not isinstance(v, bool)]
        if not ycols:
            continue
        series = _table_series(report, name, headers[0], ycols)
        emit(f"{name}.png", f"{report.name}: {name.replace('_', ' ')}",
             headers[0], ", ".join(ycols) if len(ycols) > 1 else ycols[0], series)
    return paths
