"""Discrete energy of SAV and LCN with the sources removed (2D: T=100, 3D: T=20; M=N=10).

    python scripts/energy_traces.py [--plot]

Writes ``results/energy_2d.csv`` and ``results/energy_3d.csv``; ``--plot``
additionally saves PNGs if matplotlib is available.
"""
import argparse
import pathlib

import numpy as np

from savwave.fem import build_space
from savwave.mesh import build_uniform_mesh
from savwave.problems import conservation_variant, klein_gordon_2d, sine_gordon_3d
from savwave.sav import make_context, run

CASES = [("energy_2d", klein_gordon_2d, 100.0), ("energy_3d", sine_gordon_3d, 20.0)]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--plot", action="store_true")
    parser.add_argument("--m", type=int, default=10)
    parser.add_argument("--n", type=int, default=10)
    parser.add_argument("--out", default="results")
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(exist_ok=True)

    for name, factory, t_final in CASES:
        problem = conservation_variant(factory())
        space = build_space(build_uniform_mesh(problem.dim, args.m), 1)
        ctx = make_context(space, problem, t_final / args.n)
        traces = {scheme: run(ctx, scheme, args.n)[1] for scheme in ("sav", "lcn")}
        sav = np.array([row[2] for row in traces["sav"]])
        lcn = np.array([row[2] for row in traces["lcn"]])
        times = [row[1] for row in traces["sav"]]
        print(f"{name}: SAV max relative drift {np.max(np.abs(sav - sav[0])) / sav[0]:.2e}, "
              f"LCN final relative change {(lcn[-1] - lcn[0]) / lcn[0]:+.2e}")
        lines = ["step,time,energy_sav,energy_lcn"]
        lines += [f"{i},{t:.9e},{a:.9e},{b:.9e}" for i, (t, a, b) in enumerate(zip(times, sav, lcn))]
        (out / f"{name}.csv").write_text("\n".join(lines) + "\n")
        if args.plot:
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
            fig, ax = plt.subplots(figsize=(5, 3.5))
            ax.plot(times, sav, "o-", label="SAV")
            ax.plot(times, lcn, "s--", label="LCN")
            ax.set_xlabel("t")
            ax.set_ylabel("discrete energy")
            ax.legend()
            fig.tight_layout()
            fig.savefig(out / f"{name}.png", dpi=120)


if __name__ == "__main__":
    main()
