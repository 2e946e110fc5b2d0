#!/usr/bin/env python3
"""Quick-look plots for holosim results.csv files.

Usage: plot_results.py OUT_DIR [OUT_DIR ...]
Writes a PNG next to each results.csv. Not part of the library contract.
"""
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_csv(path):
    lines = path.read_text().splitlines()
    kind = lines[0].split("kind=")[-1].strip()
    header = lines[1].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[2:] if line]
    return kind, rows


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    for out_dir in sys.argv[1:]:
        csv = Path(out_dir) / "results.csv"
        kind, rows = read_csv(csv)
        fig, ax = plt.subplots(figsize=(6, 4))
        if kind == "efficiency_sweep":
            methods = sorted({r["method"] for r in rows})
            for m in methods:
                pts = [(float(r["one_minus_eta"]), float(r["psnr_db"]))
                       for r in rows if r["method"] == m and r["status"] == "ok"]
                pts.sort()
                ax.plot(*zip(*pts), marker="o", label=m)
            ax.set_xlabel("1 - eta")
            ax.set_ylabel("PSNR (dB)")
        elif kind == "misalignment_sweep":
            for axis, style in (("lateral", "-"), ("axial", "--")):
                for m in sorted({r["method"] for r in rows}):
                    pts = [(float(r["offset"]), float(r["psnr_db"])) for r in rows
                           if r["method"] == m and r["axis"] == axis and r["status"] == "ok"]
                    if not pts:
                        continue
                    pts.sort()
                    ax.plot(*zip(*pts), style, marker=".", label=f"{m} {axis}")
            ax.set_xlabel("offset")
            ax.set_ylabel("PSNR (dB)")
            ax.set_xscale("symlog", linthresh=1e-7)
        elif kind == "fringe_convergence":
            pts = [(float(r["iteration"]), float(r["psnr_db"])) for r in rows]
            ax.plot(*zip(*pts))
            ax.set_xlabel("iteration")
            ax.set_ylabel("PSNR (dB)")
        elif kind == "contrast_eval":
            methods = sorted({r["method"] for r in rows})
            wls = sorted({r["wavelength_nm"] for r in rows}, reverse=True)
            width = 0.8 / len(methods)
            for i, m in enumerate(methods):
                vals = [float(r["michelson"]) for wl in wls for r in rows
                        if r["method"] == m and r["wavelength_nm"] == wl]
                ax.bar([j + i * width for j in range(len(wls))], vals, width, label=m)
            ax.set_xticks([j + 0.4 for j in range(len(wls))], [f"{wl}nm" for wl in wls])
            ax.set_ylabel("Michelson contrast")
        else:
            pts = [(r["method"], float(r["psnr_db"])) for r in rows if r["status"] == "ok"]
            ax.bar([p[0] for p in pts], [p[1] for p in pts])
            ax.set_ylabel("PSNR (dB)")
        ax.legend(fontsize=7)
        ax.set_title(kind)
        fig.tight_layout()
        out_png = Path(out_dir) / "results_plot.png"
        fig.savefig(out_png, dpi=130)
        print(f"wrote {out_png}")


if __name__ == "__main__":
    main()
