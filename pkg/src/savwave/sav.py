"""Linearly implicit Crank-Nicolson SAV stepper and the linearized CN baseline.

One SAV step solves, for the new displacement coefficients ``u'``,

    (4M + tau^2 S + tau^2 lam M) u' + (tau^2/2) (b.u') b
        = 4Mu - tau^2 S u - tau^2 lam M u + 4 tau M v - 2 tau^2 r b
          + (tau^2/2) (b.u) b + 2 tau^2 m_src

where ``b_i = (f(u~) / sqrt(E(u~)), phi_i)`` and ``u~`` is the extrapolated
midpoint state.  Velocity and auxiliary scalar then follow in closed form:
``v' = (2/tau)(u' - u) - v`` and ``r' = r + b.(u' - u) / 2``.  The discrete
energy ``sqrt((|v|^2 + |grad u|^2 + lam |u|^2)/2 + r^2)`` is conserved
exactly (up to the linear solve residual) when there is no source.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from savwave.errors import ConfigurationError
from savwave.fem import (
    FeFunction,
    FeSpace,
    assemble_load,
    assemble_mass,
    assemble_nonlinear_vector,
    assemble_stiffness,
    eliminate_dirichlet,
    integrate_function,
    integrate_scalar,
)
from savwave.linalg import DEFAULT_TOL, SparseMatrix, solve_rank1, solve_spd
from savwave.problems import Problem
from savwave.projection import ritz_projection

logger = logging.getLogger(__name__)

SCHEMES = ("sav", "lcn")


@dataclass(frozen=True, eq=False)
class SavState:
    u: np.ndarray
    v: np.ndarray
    r: float
    u_prev: Optional[np.ndarray]
    step: int
    tau: float

    def __post_init__(self):
        if (self.u_prev is None) != (self.step == 0):
            raise ValueError("u_prev must be absent exactly at step 0")

    @property
    def time(self) -> float:
        return self.step * self.tau


@dataclass(frozen=True, eq=False)
class StepperContext:
    space: FeSpace
    problem: Problem
    tau: float
    mass: SparseMatrix = field(repr=False)       # unconstrained
    stiffness: SparseMatrix = field(repr=False)  # unconstrained
    system: SparseMatrix = field(repr=False)     # 4M + tau^2 S + tau^2 lam M, boundary eliminated
    tol: float = DEFAULT_TOL

    def constrain(self, vec: np.ndarray) -> np.ndarray:
        vec[self.space.boundary_dofs] = 0.0
        return vec


def make_context(space: FeSpace, problem: Problem, tau: float, tol: float = DEFAULT_TOL) -> StepperContext:
    if tau <= 0:
        raise ConfigurationError(f"time step must be positive, got {tau}")
    if problem.dim != space.dim:
        raise ConfigurationError(f"problem {problem.name!r} is {problem.dim}D but the space is {space.dim}D")
    mass = assemble_mass(space, eliminate=False)
    stiff = assemble_stiffness(space, eliminate=False)
    k = (4.0 + tau**2 * problem.lam) * mass.csr + tau**2 * stiff.csr
    system = eliminate_dirichlet(space, k)
    ctx = StepperContext(space, problem, tau, mass, stiff, system, tol)
    # SPD smoke test: a successful solve on a random right-hand side
    probe = np.random.default_rng(0).standard_normal(space.n_dofs)
    solve_spd(system, ctx.constrain(probe), tol)
    return ctx


def init_state(ctx: StepperContext) -> SavState:
    """Ritz projections of the initial data and ``r = sqrt(int F(u0) + c0)``."""
    p, space = ctx.problem, ctx.space
    u = ritz_projection(space, p.u0, p.u0_grad, ctx.tol).coeffs
    v = ritz_projection(space, p.u1, p.u1_grad, ctx.tol).coeffs
    energy = integrate_function(space, lambda x: p.big_f(p.u0(x))) + p.c0
    if energy <= 0:
        raise ConfigurationError(
            f"int F(u0) + c0 = {energy:.6g} is not positive; increase c0 (currently {p.c0})"
        )
    return SavState(u=u, v=v, r=float(np.sqrt(energy)), u_prev=None, step=0, tau=ctx.tau)


def extrapolate(state: SavState) -> np.ndarray:
    if state.step == 0 or state.u_prev is None:
        return state.u.copy()
    return (3.0 * state.u - state.u_prev) / 2.0


def _explicit_rhs(ctx: StepperContext, state: SavState) -> np.ndarray:
    tau, lam = ctx.tau, ctx.problem.lam
    mu = ctx.mass.csr @ state.u
    rhs = 4.0 * mu - tau**2 * (ctx.stiffness.csr @ state.u) - tau**2 * lam * mu
    rhs += 4.0 * tau * (ctx.mass.csr @ state.v)
    if ctx.problem.source is not None:
        t_half = (state.step + 0.5) * tau
        rhs += 2.0 * tau**2 * assemble_load(ctx.space, lambda x: ctx.problem.source(x, t_half))
    return rhs


def _advance(ctx: StepperContext, state: SavState, u_new: np.ndarray, r_new: float) -> SavState:
    v_new = (2.0 / ctx.tau) * (u_new - state.u) - state.v
    return SavState(u=u_new, v=v_new, r=r_new, u_prev=state.u, step=state.step + 1, tau=state.tau)


def sav_coupling(ctx: StepperContext, state: SavState) -> np.ndarray:
    """The vector ``b_i = (f(u~) / sqrt(E(u~)), phi_i)`` for the current step."""
    p, space = ctx.problem, ctx.space
    u_tilde = FeFunction(space, extrapolate(state))
    e_tilde = integrate_scalar(space, u_tilde, p.big_f) + p.c0
    if e_tilde <= 0:
        raise ConfigurationError(
            f"E(u~) = {e_tilde:.6g} is not positive at step {state.step}; increase c0 (currently {p.c0})"
        )
    scale = 1.0 / np.sqrt(e_tilde)
    return assemble_nonlinear_vector(space, u_tilde, lambda s: p.little_f(s) * scale)


def sav_step(ctx: StepperContext, state: SavState) -> SavState:
    tau = ctx.tau
    b = sav_coupling(ctx, state)
    rhs = _explicit_rhs(ctx, state) - 2.0 * tau**2 * state.r * b + (tau**2 / 2.0) * float(b @ state.u) * b
    rhs = ctx.constrain(rhs)
    u_new = solve_rank1(ctx.system, b, tau**2 / 2.0, rhs, ctx.tol)
    r_new = state.r + 0.5 * float(b @ (u_new - state.u))
    return _advance(ctx, state, u_new, r_new)


def instantaneous_r(ctx: StepperContext, u: np.ndarray) -> float:
    p = ctx.problem
    e = integrate_scalar(ctx.space, FeFunction(ctx.space, u), p.big_f) + p.c0
    if e <= 0:
        raise ConfigurationError(f"int F(u) + c0 = {e:.6g} is not positive; increase c0 (currently {p.c0})")
    return float(np.sqrt(e))


def lcn_step(ctx: StepperContext, state: SavState) -> SavState:
    """Linearized Crank-Nicolson: nonlinearity evaluated explicitly at the extrapolated state."""
    tau, p = ctx.tau, ctx.problem
    b_f = assemble_nonlinear_vector(ctx.space, FeFunction(ctx.space, extrapolate(state)), p.little_f)
    rhs = ctx.constrain(_explicit_rhs(ctx, state) - 2.0 * tau**2 * b_f)
    u_new = solve_spd(ctx.system, rhs, ctx.tol)
    return _advance(ctx, state, u_new, instantaneous_r(ctx, u_new))


def discrete_energy(ctx: StepperContext, state: SavState) -> float:
    m, s, lam = ctx.mass.csr, ctx.stiffness.csr, ctx.problem.lam
    quad = state.v @ (m @ state.v) + state.u @ (s @ state.u) + lam * (state.u @ (m @ state.u))
    return float(np.sqrt(0.5 * quad + state.r**2))


def run(ctx: StepperContext, scheme: str = "sav", n_steps: int = 1, record_energy: bool = True,
        state: Optional[SavState] = None):
    """Advance ``n_steps`` steps; returns ``(final_state, [(step, time, energy), ...])``."""
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if n_steps < 1:
        raise ConfigurationError(f"n_steps must be at least 1, got {n_steps}")
    step = sav_step if scheme == "sav" else lcn_step
    if state is None:
        state = init_state(ctx)
        if scheme == "lcn":
            state = dataclasses.replace(state, r=instantaneous_r(ctx, state.u))
    trace = []
    if record_energy:
        trace.append((state.step, state.time, discrete_energy(ctx, state)))
    for _ in range(n_steps):
        state = step(ctx, state)
        if record_energy:
            trace.append((state.step, state.time, discrete_energy(ctx, state)))
    logger.debug("%s: %d steps of tau=%g on %d dofs", scheme, n_steps, ctx.tau, ctx.space.n_dofs)
    return state, trace
