"""Report rendering and file emission for the command-line tools.

Structured reports are JSON with fixed key order (insertion order, never
sorted), so seeded reruns are bit-identical and reports round-trip through
:func:`parse_report`.  Grids and sample tables are tab-separated text with
'#' metadata lines.  Figures are rendered with the Agg backend straight to
files, next to the delimited output they visualize.
"""

from __future__ import annotations

import json
from typing import Iterable


def render_report(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    if fmt == "table":
        return _render_table(report)
    raise ValueError(f"unknown format {fmt!r}")


def parse_report(text: str) -> dict:
    return json.loads(text)


def _fmt_value(value) -> str:
    if isinstance(value, float):
        return format(value, ".10g")
    if isinstance(value, list):
        return ", ".join(_fmt_value(v) for v in value)
    return str(value)


def _render_table(report: dict, indent: str = "") -> str:
    lines = []
    for key, value in report.items():
        if isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            lines.append(_render_table(value, indent + "  ").rstrip("\n"))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{indent}{key}:")
            for i, item in enumerate(value):
                lines.append(f"{indent}  [{i}]")
                lines.append(_render_table(item, indent + "    ").rstrip("\n"))
        else:
            lines.append(f"{indent}{key}: {_fmt_value(value)}")
    return "\n".join(lines) + "\n"


def _float17(v: float) -> str:
    return format(v, ".17g")


def render_samples_file(rows, meta: dict) -> str:
    """Tab-separated squared-correlation samples, one specimen per line."""
    out = [f"# {key} = {value}" for key, value in meta.items()]
    if len(rows):
        out.append("# columns: " + " ".join(f"r{i + 1}_sq" for i in range(len(rows[0]))))
        for row in rows:
            out.append("\t".join(_float17(v) for v in row))
    return "\n".join(out) + "\n"


def parse_samples_file(text: str):
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append(tuple(float(v) for v in line.split()))
    return rows


def render_grid_file(rows: Iterable[tuple[float, float, float]], meta: dict) -> str:
    """Tab-separated density grid: r1_sq, r2_sq, cell-mean density."""
    out = [f"# {key} = {value}" for key, value in meta.items()]
    out.append("# columns: r1_sq r2_sq density")
    for u, v, f in rows:
        out.append(f"{_float17(u)}\t{_float17(v)}\t{_float17(f)}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Figures (lazy matplotlib; Agg so this works headless)
# ---------------------------------------------------------------------------


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_density_grid_figure(path: str, rows, resolution: int, title: str) -> None:
    """Heatmap of a density grid over the ordered triangle."""
    import numpy as np

    plt = _pyplot()
    grid = np.full((resolution, resolution), np.nan)
    h = 1.0 / resolution
    for u, v, f in rows:
        grid[int(v / h), int(u / h)] = f
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    edges = np.linspace(0.0, 1.0, resolution + 1)
    mesh = ax.pcolormesh(edges, edges, grid, shading="flat", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="density")
    ax.plot([0, 1], [0, 1], color="white", lw=0.8, ls="--")
    ax.set_xlabel(r"$r_1^2$")
    ax.set_ylabel(r"$r_2^2$")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)


def save_trajectory_figure(path: str, labels, rho2_rows, drastic_index, title: str) -> None:
    """Estimate trajectory across landmark subsets, break point highlighted."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    xs = range(len(labels))
    k = len(rho2_rows[0]) if rho2_rows else 0
    for i in range(k):
        ax.plot(xs, [row[i] for row in rho2_rows], marker="o",
                label=rf"$\hat\rho_{i + 1}^2$")
    if drastic_index is not None:
        ax.axvline(drastic_index, color="red", ls=":", label="drastic change")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("landmark subset")
    ax.set_ylabel("estimate")
    ax.legend()
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)
