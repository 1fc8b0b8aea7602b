"""Reproduce the 2D and 3D manufactured-solution convergence tables.

    python scripts/convergence_tables.py            # 2D P1/P2 and 3D P1 (minutes)
    python scripts/convergence_tables.py --full     # adds the 3D P2 rows (slow)

CSV files land in ``results/``.
"""
import argparse
import pathlib
import time

from savwave.analysis import convergence_study
from savwave.problems import klein_gordon_2d, sine_gordon_3d

RUNS = [
    ("table1_p1", klein_gordon_2d, 1, [8, 16, 24, 32, 40], "eq-m"),
    ("table1_p2", klein_gordon_2d, 2, [8, 16, 24, 32, 40], "eq-m-3/2"),
    ("table2_p1", sine_gordon_3d, 1, [16, 20, 24, 28], "eq-m"),
]
FULL_ONLY = [
    ("table2_p2", sine_gordon_3d, 2, [10, 12, 14, 16], "eq-m-3/2"),
]


def cell(x):
    return "" if x is None else f"{x:.9e}"


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--full", action="store_true")
    parser.add_argument("--out", default="results")
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(exist_ok=True)

    for name, factory, degree, ms, rule in RUNS + (FULL_ONLY if args.full else []):
        start = time.perf_counter()
        reports = convergence_study(factory(), degree, ms, rule, 1.0)
        print(f"\n{name}  ({time.perf_counter() - start:.1f} s)")
        print(f"{'M':>4} {'N':>5} {'L2 err':>10} {'order':>6} {'H1 super':>10} {'order':>6} {'H1 err':>10} {'order':>6}")
        for r in reports:
            def o(v):
                return "    --" if v is None else f"{v:6.2f}"
            print(f"{r.m:4d} {r.n_steps:5d} {r.l2_error:10.3e} {o(r.l2_order)} {r.h1_superclose:10.3e} "
                  f"{o(r.h1_order)} {r.h1_error:10.3e} {o(r.h1_error_order)}")
        lines = ["m,n,h,tau,l2_error,l2_order,h1_superclose,h1_order,h1_error,h1_error_order"]
        for r in reports:
            lines.append(",".join([str(r.m), str(r.n_steps)] + [cell(v) for v in (
                r.h, r.tau, r.l2_error, r.l2_order, r.h1_superclose, r.h1_order, r.h1_error, r.h1_error_order)]))
        (out / f"{name}.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
