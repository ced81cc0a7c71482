#!/usr/bin/env python3
"""Quick-look plots for harness output directories.

Usage: plot.py OUTPUT_DIR [PNG]

Scans OUTPUT_DIR (recursively) for the CSV kinds the harness emits and draws
one panel per kind it finds:
  - time series   (header starts with  n,)        delta2 vs n per file
  - distributions (header  P,f)                   log-scale f(P)
  - diffusion fit (header  x,w,D,residual_stderr) log-log D vs x
  - series diffs  (header  n,delta2_qm,...)       quantum vs classical delta2

This is a viewing aid only; the simulation core never touches a plotting
library. Requires matplotlib.
"""
import csv
import pathlib
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {name: [] for name in header}
    for row in body:
        for name, cell in zip(header, row):
            cols[name].append(float(cell) if cell else None)
    return cols


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__.strip())
    root = pathlib.Path(sys.argv[1])
    out_png = sys.argv[2] if len(sys.argv) > 2 else "plots.png"

    kinds = {"series": [], "dist": [], "scaling": [], "diff": []}
    for path in sorted(root.rglob("*.csv")):
        with open(path) as fh:
            header = fh.readline().strip()
        if header.startswith("n,delta2_qm"):
            kinds["diff"].append(path)
        elif header.startswith("n,"):
            kinds["series"].append(path)
        elif header == "P,f":
            kinds["dist"].append(path)
        elif header.startswith("x,w,D"):
            kinds["scaling"].append(path)

    panels = [(k, v) for k, v in kinds.items() if v]
    if not panels:
        sys.exit(f"no recognized CSVs under {root}")

    fig, axes = plt.subplots(1, len(panels), figsize=(5.5 * len(panels), 4.2))
    axes = [axes] if len(panels) == 1 else list(axes)

    for ax, (kind, paths) in zip(axes, panels):
        for path in paths:
            cols = read_csv(path)
            label = path.stem
            if kind == "series":
                ax.plot(cols["n"], cols["delta2"], label=label)
                ax.set(xlabel="n", ylabel=r"$\Delta^2$")
            elif kind == "dist":
                ax.semilogy(cols["P"], cols["f"], label=label)
                ax.set(xlabel="P", ylabel="f(P)")
            elif kind == "scaling":
                ax.loglog(cols["x"], cols["D"], "o-", label=label)
                ax.set(xlabel=r"$wK/\hbar$", ylabel="D")
            else:
                ax.plot(cols["n"], cols["delta2_qm"], label=f"{label} qm")
                ax.plot(cols["n"], cols["delta2_cl"], "--", label=f"{label} cl")
                ax.set(xlabel="n", ylabel=r"$\Delta^2$")
        ax.legend(fontsize=7)
        ax.set_title(kind)

    fig.tight_layout()
    fig.savefig(out_png, dpi=140)
    print(f"wrote {out_png}")


if __name__ == "__main__":
    main()
