"""Plot the CSVs written by run_all_experiments.py (needs matplotlib).

usage: python3 scripts/plot_results.py [results_dir]
"""
import csv
import sys
from pathlib import Path

import numpy as np


def load(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def main():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    d = Path(sys.argv[1] if len(sys.argv) > 1 else "results")
    fig, ax = plt.subplots(1, 3, figsize=(13, 4))

    _, a = load(d / "pole_decay.csv")
    ax[0].semilogy(a[:, 0], a[:, 1], "o-")
    ax[0].set_xlabel("P")
    ax[0].set_ylabel("sup error")

    _, a = load(d / "numpoles.csv")
    ax[1].plot(a[:, 1], a[:, 2], "s-")
    ax[1].set_xlabel("log10(10 / sigma)")
    ax[1].set_ylabel("poles for 1e-8")

    _, a = load(d / "z_sweep.csv")
    n = int(round(np.sqrt(a.shape[0])))
    im = ax[2].imshow(np.log10(a[:, 2]).reshape(n, n).T, origin="lower", aspect="auto",
                      extent=[a[:, 0].min(), a[:, 0].max(), a[:, 1].min(), a[:, 1].max()])
    fig.colorbar(im, ax=ax[2], label="log10 error")
    ax[2].set_xlabel("Re z")
    ax[2].set_ylabel("Im z")

    fig.tight_layout()
    fig.savefig(d / "figures.png", dpi=120)
    print(f"wrote {d / 'figures.png'}")


if __name__ == "__main__":
    main()
