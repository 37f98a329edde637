"""Bounds on H(X|Y) for the example confusion-matrix family over a range of n.

    python scripts/figure2b.py --n-max 30 --out figure2b.csv [--plot figure2b.png]
"""

import argparse

from tightbound.formats import atomic_write
from tightbound.oracle import figure2b_table, rows_to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=30)
    ap.add_argument("--out", default="figure2b.csv")
    ap.add_argument("--plot", help="optional PNG path (needs matplotlib)")
    args = ap.parse_args()

    rows = figure2b_table(range(2, args.n_max + 1))
    atomic_write(args.out, rows_to_csv(rows))
    for r in rows[:5]:
        print(f"n={r.n:3d}  H(X|Xhat)={r.h_post:.6f}  confusion bound={r.bound_ours:.6f}  error-only bound={r.bound_kov:.6f}")
    print(f"... {len(rows)} rows written to {args.out}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        ns = [r.n for r in rows]
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        ax.plot(ns, [r.h_post for r in rows], "o", label="H(X|X̂) (upper)")
        ax.plot(ns, [r.bound_ours for r in rows], "o", label="confusion-matrix bound")
        ax.plot(ns, [r.bound_kov for r in rows], "o", label="error-probability bound")
        ax.set_xlabel("|X|")
        ax.set_ylabel("bits")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)
        print(f"plot saved to {args.plot}")


if __name__ == "__main__":
    main()
