"""Regenerate the three transmission figures from the built-in presets.

Writes one CSV per curve into ``--out`` and, when matplotlib is available,
one SVG per figure with all curves overlaid. Prints the peak of every curve.

    python scripts/reproduce_figures.py --out figures/
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from quadromech.cli import cmd_spectrum
from quadromech.config import PRESETS, resolve

LABELS = {"fig1": "omega_e", "fig2": "omega_a", "fig3": "omega_m"}


def run_preset(name: str, out: Path) -> list[tuple[str, np.ndarray, np.ndarray]]:
    curves = []
    for k in range(1, len(PRESETS[name]) + 1):
        cfg = resolve(preset=name, curve=k)
        result = cmd_spectrum(cfg)
        x = np.array([r[0] for r in result.rows])
        T = np.array([r[3] for r in result.rows])
        label = f"{LABELS[name]}={cfg['params'][LABELS[name]]:g}"
        (out / f"{name}_curve{k}.csv").write_text(result.to_csv(), encoding="utf-8")
        j = int(np.argmax(T))
        print(f"{name} {label:>14}  peak T = {T[j]:.4f} at {cfg['sweep']['axis']} = {x[j]:+.4f}")
        curves.append((label, x, T))
    return curves


def plot(name: str, curves, out: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for label, x, T in curves:
        ax.plot(x, T, lw=1.2, label=label)
    ax.set_xlabel(resolve(preset=name)["sweep"]["axis"])
    ax.set_ylabel("transmission intensity")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out / f"{name}.svg")
    plt.close(fig)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures", type=Path)
    ap.add_argument("--no-plot", action="store_true")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name in PRESETS:
        curves = run_preset(name, args.out)
        if not args.no_plot:
            try:
                plot(name, curves, args.out)
            except ImportError:
                print("matplotlib not installed; skipping SVG output")
                args.no_plot = True


if __name__ == "__main__":
    main()
