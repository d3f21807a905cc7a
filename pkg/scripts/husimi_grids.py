"""Husimi Q grids for the states met along the protocol; writes results/husimi_*.csv."""
import argparse
import math
import pathlib

import numpy as np

from grovercavity import planner
from grovercavity.symspace import apply_rotation, css_state, dicke, ghz_state, husimi_q


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--n-beta", type=int, default=91)
    ap.add_argument("--n-phi", type=int, default=180)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    n = args.n
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    states = {
        "css": css_state(n, math.pi / 2),
        "dicke_half": dicke(n, n // 2),
        "rotated_dicke": apply_rotation(dicke(n, n // 2), -math.pi / 2),
    }
    if n % 2 == 0:
        states["ghz"] = ghz_state(n, planner.ghz_sign(n))

    betas = np.linspace(0.0, math.pi, args.n_beta)
    phis = np.linspace(-math.pi, math.pi, args.n_phi, endpoint=False)
    for name, s in states.items():
        q = husimi_q(s, betas, phis)
        (out / f"husimi_{name}.csv").write_text(q.to_csv())
        i, j = np.unravel_index(np.argmax(q.values), q.values.shape)
        print(f"{name}: peak at beta={betas[i]:.3f}, phi={phis[j]:.3f}")


if __name__ == "__main__":
    main()
