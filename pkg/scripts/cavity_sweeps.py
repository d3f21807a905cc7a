"""Noisy-protocol experiments with the reflection-based cavity gate.

Writes to results/:
  fidelity_vs_m.csv      optimized fidelities for m = 1..8 at g=10, kappa=gamma=1, sigma=0.1
  coop_unheralded.csv    infidelity vs C (N=15, m=1, sigma=0.01)
  coop_heralded.csv      same, heralded
  chi0_probe.csv         single chi_0 infidelity vs C
  fidelity_vs_n.csv      m=2 fidelity vs N at C=100
  bandwidth.csv          bandwidth-only infidelity vs sigma (loss off)
"""
import argparse
import csv
import pathlib

import numpy as np

from grovercavity import planner, protocol
from grovercavity.cavity import CavityParams
from grovercavity.planner import Dicke
from grovercavity.symspace import css_state

BASE = CavityParams(g=10.0, kappa=1.0, gamma=1.0, delta=31.6)
C_LIST = [1e2, 1e3, 1e4, 1e5, 1e6]


def save(tab, path):
    path.write_text(tab.to_csv())
    fit = protocol.fit_exponent(tab) if tab.axis_name != "N" else None
    extra = f"  slope={fit.slope:.3f} r2={fit.r2:.4f}" if fit else ""
    print(f"{path.name}: {len(tab.axis)} points{extra}")


def fidelity_vs_m(out, n):
    with open(out / "fidelity_vs_m.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "k", "fidelity", "delta", "k_herald", "fidelity_herald", "success_prob", "delta_herald"])
        for m in range(1, 9):
            u = protocol.optimize(n, Dicke(m), BASE, 0.1, False)
            h = protocol.optimize(n, Dicke(m), BASE, 0.1, True)
            w.writerow([m, u.k_used, f"{u.fidelity:.17g}", f"{u.delta_used:.17g}",
                        h.k_used, f"{h.fidelity:.17g}", f"{h.success_prob:.17g}", f"{h.delta_used:.17g}"])
            print(f"  m={m}: F={u.fidelity:.3f}  F_herald={h.fidelity:.3f}  P={h.success_prob:.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results")
    ap.add_argument("--n", type=int, default=20, help="qubit number for the m scan")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    fidelity_vs_m(out, args.n)
    for heralded, name in ((False, "coop_unheralded.csv"), (True, "coop_heralded.csv")):
        save(protocol.sweep_cooperativity(15, 1, C_LIST, 0.01, heralded, jobs=args.jobs), out / name)
    save(protocol.sweep_chi0(15, C_LIST, 1e-4, jobs=args.jobs), out / "chi0_probe.csv")
    save(protocol.sweep_qubits(2, list(range(8, 65, 8)), BASE, 0.1, jobs=args.jobs), out / "fidelity_vs_n.csv")

    lossless = CavityParams(10.0, 1.0, 0.0, 100.0)
    s = css_state(15, planner.solve_phi_dicke(15, 1, 1))
    save(protocol.sweep_sigma(lossless, s, 1, np.geomspace(1e-3, 1e-1, 9)), out / "bandwidth.csv")


if __name__ == "__main__":
    main()
