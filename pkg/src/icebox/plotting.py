"""SVG rendering of already-serialized experiment data.

Plots are generated strictly from CSV files on disk, never from in-memory
arrays, so a plot can always be regenerated from the shipped data alone.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import UsageError


def _load_csv(path: Path) -> dict[str, np.ndarray]:
    if not path.exists():
        raise UsageError(f"data file not found: {path}")
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    data = np.array(rows)
    return {name: data[:, i] for i, name in enumerate(header)}


def emit_plot(out_dir: Path, spec: dict) -> Path:
    """Render one SVG according to a small declarative spec.

    Required keys: ``kind`` (line | heatmap | loglog-scaling | spectrum),
    ``file`` (CSV inside ``out_dir``), ``out`` (SVG name).  Line-like kinds
    need ``x`` and ``y`` column names.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    kind = spec.get("kind")
    data = _load_csv(out_dir / spec["file"])
    out_path = out_dir / spec["out"]

    def column(name):
        if name not in data:
            raise UsageError(f"column {name!r} missing from {spec['file']}")
        return data[name]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        if kind == "line":
            x = column(spec["x"])
            for name in spec["y"]:
                ax.plot(x, column(name), label=name)
            if len(spec["y"]) > 1:
                ax.legend()
        elif kind == "heatmap":
            x = column(spec["x"])
            names = [c for c in data if c != spec["x"]]
            grid = np.stack([data[c] for c in names])
            mesh = ax.pcolormesh(x, np.arange(len(names)), grid, shading="nearest")
            fig.colorbar(mesh, ax=ax)
        elif kind == "spectrum":
            x = column(spec["x"])
            for name in spec["y"]:
                ax.plot(x, column(name))
            for marker in spec.get("markers", []):
                ax.axvline(marker, color="gray", linestyle="--", linewidth=0.8)
            if spec.get("markers"):
                ax.set_xlim(0, 2.0 * max(spec["markers"]))
        elif kind == "loglog-scaling":
            x = column(spec["x"])  # qubit counts: log2 N_s directly
            y = np.log2(column(spec["y"][0]))
            ax.plot(x, y, "o", label="computed")
            anchor = y[0]
            for slope, style in ((-0.5, "--"), (-1.0, ":")):
                ax.plot(x, anchor + slope * (x - x[0]), style, label=f"slope {slope}")
            if "slope" in spec:
                ax.plot(
                    x,
                    spec["intercept"] + spec["slope"] * x,
                    "-",
                    label=f"fit {spec['slope']:.3f}",
                )
            ax.legend()
        else:
            raise UsageError(f"unknown plot kind {kind!r}")
        ax.set_xlabel(spec.get("xlabel", ""))
        ax.set_ylabel(spec.get("ylabel", ""))
        fig.tight_layout()
        fig.savefig(out_path, format="svg")
    finally:
        plt.close(fig)
    return out_path
