"""Command-line driver: ``savwave <converge|energy|run> ...``.

Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import io
import logging
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from savwave.analysis import N_RULES, convergence_study, error_report, fill_orders, n_steps_for
from savwave.errors import ConfigurationError, SavwaveError
from savwave.fem import FeFunction, build_space
from savwave.linalg import DEFAULT_TOL
from savwave.mesh import build_uniform_mesh
from savwave.problems import CATALOG, conservation_variant, get_problem
from savwave.projection import h1_norm_diff, l2_error, ritz_projection
from savwave.sav import discrete_energy, make_context, run

logger = logging.getLogger("savwave")

COMMANDS = ("converge", "energy", "run")
SCHEME_CHOICES = ("sav", "lcn", "both")


@dataclass(frozen=True)
class RunConfig:
    command: str
    problem: str
    degree: int = 1
    m: tuple[int, ...] = (8,)
    n: Optional[int] = None
    n_rule: Optional[str] = None
    t_final: float = 1.0
    scheme: str = "sav"
    tol: float = DEFAULT_TOL
    output_path: Optional[str] = None
    dump_path: Optional[str] = None
    verbose: bool = False

    def steps_for(self, m: int) -> int:
        if self.n is not None:
            return self.n
        return n_steps_for(m, self.n_rule or "eq-m")

    def to_argv(self) -> list[str]:
        argv = ["--verbose"] if self.verbose else []
        argv += [self.command, "--problem", self.problem, "--degree", str(self.degree),
                "--m", ",".join(str(m) for m in self.m)]
        if self.n is not None:
            argv += ["--n", str(self.n)]
        if self.n_rule is not None:
            argv += ["--n-rule", self.n_rule]
        argv += ["--t", repr(self.t_final), "--scheme", self.scheme, "--tol", repr(self.tol)]
        if self.output_path is not None:
            argv += ["--out", self.output_path]
        if self.dump_path is not None:
            argv += ["--dump", self.dump_path]
        return argv


def fmt(x) -> str:
    """Reals with 10 significant digits; empty cell for missing values."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".9e")


def _m_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or comma-separated integers, got {text!r}")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"subdivisions must be positive integers, got {text!r}")
    return values


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="savwave",
        description="Energy-conserving SAV Crank-Nicolson finite elements for nonlinear wave equations.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "converge": "manufactured-solution convergence study (one CSV row per M)",
        "energy": "discrete energy trace with the source removed",
        "run": "single trajectory with a final-state summary",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--problem", required=True, choices=sorted(CATALOG), metavar="ID",
                       help=f"one of: {', '.join(sorted(CATALOG))}")
        p.add_argument("--degree", type=int, default=1, choices=(1, 2))
        p.add_argument("--m", type=_m_list, default=(8,), help="subdivisions per axis (list for converge)")
        steps = p.add_mutually_exclusive_group()
        steps.add_argument("--n", type=_positive_int, default=None, help="number of time steps")
        steps.add_argument("--n-rule", choices=N_RULES, default=None,
                           help="time steps from M: eq-m (N=M) or eq-m-3/2 (N=ceil(M^1.5))")
        p.add_argument("--t", dest="t_final", type=_positive_float, default=1.0, help="final time")
        p.add_argument("--scheme", choices=SCHEME_CHOICES, default="sav")
        p.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL, help="linear solver tolerance")
        p.add_argument("--out", dest="output_path", default=None, help="CSV output path (default stdout)")
        if name == "run":
            p.add_argument("--dump", dest="dump_path", default=None,
                           help="write dof coordinates and final coefficients to this CSV")
    return parser


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command != "converge" and len(ns.m) != 1:
        parser.error(f"--m takes a single value for {ns.command}")
    if ns.command == "converge" and any(b <= a for a, b in zip(ns.m, ns.m[1:])):
        parser.error("--m list must be strictly increasing")
    if ns.command != "energy" and ns.scheme == "both":
        parser.error("--scheme both is only available for the energy command")
    return RunConfig(
        command=ns.command,
        problem=ns.problem,
        degree=ns.degree,
        m=tuple(ns.m),
        n=ns.n,
        n_rule=ns.n_rule,
        t_final=ns.t_final,
        scheme=ns.scheme,
        tol=ns.tol,
        output_path=ns.output_path,
        dump_path=getattr(ns, "dump_path", None),
        verbose=ns.verbose,
    )


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(x) for x in row) + "\n")
    return buf.getvalue()


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)


def cmd_converge(cfg: RunConfig) -> str:
    problem = get_problem(cfg.problem)
    if cfg.scheme != "sav":
        raise ConfigurationError("convergence studies use the SAV scheme only")
    if cfg.n is not None:
        # fixed N for every M
        reports = [error_report(problem, cfg.degree, m, cfg.n, cfg.t_final, cfg.tol) for m in cfg.m]
        fill_orders(reports)
    else:
        reports = convergence_study(problem, cfg.degree, cfg.m, cfg.n_rule or "eq-m", cfg.t_final, cfg.tol)
    header = ("m", "n", "h", "tau", "l2_error", "l2_order", "h1_superclose", "h1_order")
    rows = [(r.m, r.n_steps, r.h, r.tau, r.l2_error, r.l2_order, r.h1_superclose, r.h1_order) for r in reports]
    return _csv(header, rows)


def _energy_trace(cfg: RunConfig, scheme: str):
    problem = conservation_variant(get_problem(cfg.problem))
    m = cfg.m[0]
    n = cfg.steps_for(m)
    space = build_space(build_uniform_mesh(problem.dim, m), cfg.degree, problem.bc_kind)
    ctx = make_context(space, problem, cfg.t_final / n, cfg.tol)
    _, trace = run(ctx, scheme, n, record_energy=True)
    return trace


def cmd_energy(cfg: RunConfig) -> str:
    if cfg.scheme == "both":
        sav = _energy_trace(cfg, "sav")
        lcn = _energy_trace(cfg, "lcn")
        rows = [(s[0], s[1], s[2], l[2]) for s, l in zip(sav, lcn)]
        return _csv(("step", "time", "energy_sav", "energy_lcn"), rows)
    return _csv(("step", "time", "energy"), _energy_trace(cfg, cfg.scheme))


def cmd_run(cfg: RunConfig) -> str:
    problem = get_problem(cfg.problem)
    m = cfg.m[0]
    n = cfg.steps_for(m)
    space = build_space(build_uniform_mesh(problem.dim, m), cfg.degree, problem.bc_kind)
    ctx = make_context(space, problem, cfg.t_final / n, cfg.tol)
    state, _ = run(ctx, cfg.scheme, n, record_energy=False)
    energy = discrete_energy(ctx, state)
    l2 = h1 = None
    if problem.has_exact:
        t = state.time
        uh = FeFunction(space, state.u)
        l2 = l2_error(space, uh, lambda x: problem.exact(x, t))
        ritz = ritz_projection(space, lambda x: problem.exact(x, t), lambda x: problem.exact_grad(x, t), cfg.tol)
        h1 = h1_norm_diff(space, ritz, uh)
    if cfg.dump_path is not None:
        coord_names = ("x", "y", "z")[: space.dim]
        rows = [tuple(c) + (u,) for c, u in zip(space.dof_coords, state.u)]
        _write(_csv(coord_names + ("u",), rows), cfg.dump_path)
    header = ("problem", "scheme", "m", "n", "t_final", "energy", "l2_error", "h1_superclose")
    return ",".join(header) + "\n" + ",".join(
        [problem.name, cfg.scheme, str(m), str(n), fmt(state.time), fmt(energy), fmt(l2), fmt(h1)]
    ) + "\n"


HANDLERS = {"converge": cmd_converge, "energy": cmd_energy, "run": cmd_run}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if cfg.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    logger.info("config: %s", " ".join(cfg.to_argv()))
    try:
        text = HANDLERS[cfg.command](cfg)
    except ConfigurationError as exc:
        print(f"savwave: configuration error: {exc}", file=sys.stderr)
        return 2
    except (SavwaveError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"savwave: numerical failure: {exc}", file=sys.stderr)
        return 1
    _write(text, cfg.output_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
