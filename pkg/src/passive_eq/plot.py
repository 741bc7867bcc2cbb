"""Plot a CSV sweep written by the CLI: ``python -m passive_eq.plot verify.csv out.png``.

Requires matplotlib (the ``plot`` extra).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .io import read_sweep_csv

LABELS = {
    "maxeig_Pe": r"$\lambda_{\max} P_e$",
    "maxeig_Pyu": r"$\lambda_{\max} P_{y-u}$",
    "maxeig_Pmyu": r"$\lambda_{\max} P_{-y-u}$",
    "gamma2": r"$\gamma^2$",
}


def plot_sweep(data: dict, ax=None):
    import matplotlib.pyplot as plt

    if ax is None:
        _, ax = plt.subplots(figsize=(6, 4))
    om = data["omega"]
    for name, vals in data.items():
        if name == "omega" or np.all(np.isnan(vals)):
            continue
        style = "--" if name == "gamma2" else "-"
        ax.plot(om, vals, style, label=LABELS.get(name, name))
    ax.set_xlabel(r"$\omega$ (rad/s)")
    ax.legend()
    ax.grid(alpha=0.3)
    return ax


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description="Plot a CSV frequency sweep.")
    p.add_argument("csv")
    p.add_argument("output")
    args = p.parse_args(argv)
    import matplotlib

    matplotlib.use("Agg")
    ax = plot_sweep(read_sweep_csv(args.csv))
    ax.figure.tight_layout()
    ax.figure.savefig(args.output, dpi=150)
    return 0


if __name__ == "__main__":
    sys.exit(main())
