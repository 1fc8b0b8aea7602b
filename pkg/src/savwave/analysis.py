"""Error metrics and manufactured-solution convergence studies."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from savwave.errors import ConfigurationError
from savwave.fem import FeFunction, build_space
from savwave.linalg import DEFAULT_TOL
from savwave.mesh import build_uniform_mesh, mesh_size
from savwave.problems import Problem
from savwave.projection import h1_error, h1_norm_diff, l2_error, ritz_projection
from savwave.sav import make_context, run

__all__ = [
    "ErrorReport", "convergence_order", "convergence_study", "fill_orders", "h1_error",
    "h1_norm_diff", "l2_error", "n_steps_for", "ritz_projection", "N_RULES",
]

N_RULES = ("eq-m", "eq-m-3/2")


@dataclass
class ErrorReport:
    m: int
    n_steps: int
    h: float
    tau: float
    l2_error: float
    h1_superclose: float
    l2_order: Optional[float] = None
    h1_order: Optional[float] = None
    h1_error: Optional[float] = None  # plain ||u - u_h||_{H1}, for the supercloseness comparison
    h1_error_order: Optional[float] = None


def convergence_order(coarse_err: float, fine_err: float, ratio: float) -> float:
    """Observed order ``log(coarse/fine) / log(ratio)``."""
    if coarse_err <= 0 or fine_err <= 0:
        raise ValueError("errors must be positive")
    if ratio <= 1:
        raise ValueError("ratio must exceed 1")
    return math.log(coarse_err / fine_err) / math.log(ratio)


def n_steps_for(m: int, rule: str) -> int:
    """Time steps for ``m`` subdivisions; ``eq-m-3/2`` rounds ``m^(3/2)`` up."""
    if rule == "eq-m":
        return m
    if rule == "eq-m-3/2":
        cube = m**3
        root = math.isqrt(cube)
        return root if root * root == cube else root + 1
    raise ConfigurationError(f"unknown n-rule {rule!r}; expected one of {N_RULES}")


def fill_orders(reports: Sequence[ErrorReport]) -> None:
    for prev, cur in zip(reports, reports[1:]):
        ratio = cur.m / prev.m
        cur.l2_order = convergence_order(prev.l2_error, cur.l2_error, ratio)
        cur.h1_order = convergence_order(prev.h1_superclose, cur.h1_superclose, ratio)
        if prev.h1_error is not None and cur.h1_error is not None:
            cur.h1_error_order = convergence_order(prev.h1_error, cur.h1_error, ratio)


def error_report(problem: Problem, degree: int, m: int, n_steps: int, t_final: float,
                 tol: float = DEFAULT_TOL) -> ErrorReport:
    """Run SAV to ``t_final`` and measure the errors against the exact solution."""
    if not problem.has_exact:
        raise ConfigurationError(f"problem {problem.name!r} has no exact solution; errors are unavailable")
    space = build_space(build_uniform_mesh(problem.dim, m), degree, problem.bc_kind)
    tau = t_final / n_steps
    ctx = make_context(space, problem, tau, tol)
    state, _ = run(ctx, "sav", n_steps, record_energy=False)
    t = state.time

    def exact(x):
        return problem.exact(x, t)

    def grad(x):
        return problem.exact_grad(x, t)

    uh = FeFunction(space, state.u)
    ritz = ritz_projection(space, exact, grad if problem.exact_grad else None, tol)
    return ErrorReport(
        m=m,
        n_steps=n_steps,
        h=mesh_size(space.mesh),
        tau=tau,
        l2_error=l2_error(space, uh, exact),
        h1_superclose=h1_norm_diff(space, ritz, uh),
        h1_error=h1_error(space, uh, exact, grad) if problem.exact_grad else None,
    )


def convergence_study(problem: Problem, degree: int, m_list: Sequence[int], n_rule: str = "eq-m",
                      t_final: float = 1.0, tol: float = DEFAULT_TOL) -> list[ErrorReport]:
    m_list = [int(m) for m in m_list]
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ConfigurationError(f"m_list must be strictly increasing, got {m_list}")
    if not problem.has_exact:
        raise ConfigurationError(f"problem {problem.name!r} has no exact solution; errors are unavailable")
    reports = [error_report(problem, degree, m, n_steps_for(m, n_rule), t_final, tol) for m in m_list]
    fill_orders(reports)
    return reports
