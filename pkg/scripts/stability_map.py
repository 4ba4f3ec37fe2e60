"""Stability phase diagram over cavity detuning and quadratic coupling.

Each grid point solves the self-consistent adiabatic steady state, builds the
drift matrix and records the largest eigenvalue real part together with the
Routh-Hurwitz verdict. Disagreements away from marginality are counted.

    python scripts/stability_map.py --n 81 --out stability_map.csv
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from quadromech.cli import cmd_map
from quadromech.config import resolve


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=61, help="grid points per axis")
    ap.add_argument("--eta", type=float, default=1.5)
    ap.add_argument("--Gamma", type=float, default=0.3)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", type=Path, default=Path("stability_map.csv"))
    ap.add_argument("--plot", type=Path, default=None, help="optional SVG heat map")
    args = ap.parse_args()

    cfg = resolve(
        overrides=[
            f"map.x_n={args.n}", f"map.y_n={args.n}",
            f"params.eta={args.eta}", f"params.Gamma={args.Gamma}",
        ]
    )
    result = cmd_map(cfg, workers=args.workers)
    args.out.write_text(result.to_csv(), encoding="utf-8")

    rows = [r for r in result.rows if not r[-1]]
    stable = sum(bool(r[3]) for r in rows)
    disagree = sum(r[5] is False for r in rows)
    print(f"{len(rows)} points solved, {stable} stable, {len(result.rows) - len(rows)} failed, {disagree} verdict mismatches")

    if args.plot is not None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        mp = cfg["map"]
        grid = np.full((mp["y_n"], mp["x_n"]), np.nan)
        for k, r in enumerate(result.rows):
            if r[6] is not None:
                grid[k // mp["x_n"], k % mp["x_n"]] = r[6]
        fig, ax = plt.subplots(figsize=(5, 4))
        lim = np.nanmax(np.abs(grid))
        im = ax.imshow(grid, origin="lower", aspect="auto", cmap="RdBu_r", vmin=-lim, vmax=lim,
                       extent=(mp["x_start"], mp["x_stop"], mp["y_start"], mp["y_stop"]))
        ax.set_xlabel(mp["x_axis"])
        ax.set_ylabel(mp["y_axis"])
        fig.colorbar(im, label="max Re(lambda)")
        fig.tight_layout()
        fig.savefig(args.plot)
        plt.close(fig)


if __name__ == "__main__":
    main()
