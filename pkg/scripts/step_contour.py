"""Minimal Grover step count for every (N, m) with 3 <= N <= N_MAX; writes results/step_contour.csv."""
import argparse
import pathlib
import time

from grovercavity import planner


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=500)
    ap.add_argument("--out", default="results/step_contour.csv")
    args = ap.parse_args()

    t0 = time.perf_counter()
    rows = planner.contour_table(args.n_max)
    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(planner.contour_csv(rows))

    counts = {}
    for _, _, k in rows:
        counts[k] = counts.get(k, 0) + 1
    print(f"{len(rows)} rows in {time.perf_counter() - t0:.2f}s -> {out}")
    for k in sorted(counts):
        print(f"  k={k}: {counts[k]} targets")
    w_steps = {k for n, m, k in rows if m == 1}
    print(f"  W-state step counts over all N: {sorted(w_steps)}")
    print(f"  N=100, m=50 needs k={planner.min_steps_dicke(100, 50)}")


if __name__ == "__main__":
    main()
