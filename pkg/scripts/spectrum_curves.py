"""Tabulate the eigenvalue curves lam_n^{+-}(b) on a grid of radii as CSV."""

import argparse
import sys

import numpy as np

from vstates.io import write_csv
from vstates.spectral import eigenvalues


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--nmax", type=int, default=8)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out")
    args = p.parse_args()
    rows = []
    for b in np.linspace(0.01, 0.99, args.points):
        for n in range(1, args.nmax + 1):
            roots = eigenvalues(n, float(b))
            rows.append([float(b), n, *(roots if roots is not None else (None, None))])
    text = write_csv(["b", "n", "lambda_minus", "lambda_plus"], rows)
    if args.out:
        open(args.out, "w", encoding="utf-8").write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
