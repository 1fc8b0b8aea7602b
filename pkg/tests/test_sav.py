import dataclasses
import math

import numpy as np
import pytest
from scipy import integrate

from oracles import dense_assembly
from savwave.errors import ConfigurationError
from savwave.fem import FeFunction, assemble_load
from savwave.problems import Problem, conservation_variant, klein_gordon_2d, sine_gordon_3d
from savwave.projection import l2_error
from savwave.sav import (
    SavState,
    discrete_energy,
    extrapolate,
    init_state,
    lcn_step,
    make_context,
    run,
    sav_coupling,
    sav_step,
)
from conftest import make_space


def bump2d(x):
    return np.sin(np.pi * x[:, 0]) * np.sin(np.pi * x[:, 1])


def linear_problem(lam=0.0, u0=bump2d, u1=None, bc="dirichlet"):
    return Problem(
        name="linear",
        dim=2,
        lam=lam,
        big_f=lambda s: 0.0 * s,
        little_f=lambda s: 0.0 * s,
        c0=1.0,
        u0=u0,
        u1=u1 or (lambda x: 0.5 * u0(x)),
        bc_kind=bc,
    )


def quartic_problem(lam, bc="dirichlet"):
    # F(s) = s^4/4 >= 0 with a mass term
    return Problem(
        name="quartic",
        dim=2,
        lam=lam,
        big_f=lambda s: s**4 / 4,
        little_f=lambda s: s**3,
        c0=0.5,
        u0=lambda x: 2 * bump2d(x) if bc == "dirichlet" else np.cos(2 * np.pi * x[:, 0]) * np.sin(2 * np.pi * x[:, 1]),
        u1=lambda x: bump2d(x) if bc == "dirichlet" else np.sin(2 * np.pi * x[:, 0]),
        bc_kind=bc,
    )


def test_extrapolate():
    s0 = SavState(u=np.array([4.0]), v=np.zeros(1), r=1.0, u_prev=None, step=0, tau=0.1)
    np.testing.assert_array_equal(extrapolate(s0), [4.0])
    s1 = SavState(u=np.array([2.0]), v=np.zeros(1), r=1.0, u_prev=np.array([0.0]), step=1, tau=0.1)
    np.testing.assert_array_equal(extrapolate(s1), [3.0])
    s2 = dataclasses.replace(s1, u_prev=np.array([2.0]))
    np.testing.assert_array_equal(extrapolate(s2), [2.0])


def test_state_invariant():
    with pytest.raises(ValueError):
        SavState(u=np.zeros(1), v=np.zeros(1), r=1.0, u_prev=np.zeros(1), step=0, tau=0.1)
    with pytest.raises(ValueError):
        SavState(u=np.zeros(1), v=np.zeros(1), r=1.0, u_prev=None, step=2, tau=0.1)


def test_zero_dynamics():
    p = linear_problem(u0=lambda x: 0 * x[:, 0], u1=lambda x: 0 * x[:, 0])
    ctx = make_context(make_space(2, 4, 1), p, 0.1)
    s0 = init_state(ctx)
    assert s0.r == 1.0 and not np.any(s0.u)
    s1 = sav_step(ctx, s0)
    assert s1.step == 1 and s1.r == 1.0
    assert not np.any(s1.u) and not np.any(s1.v)
    s1l = lcn_step(ctx, s0)
    assert not np.any(s1l.u) and not np.any(s1l.v)


def test_discrete_energy_examples():
    ctx = make_context(make_space(2, 4, 1), linear_problem(), 0.1)
    n = ctx.space.n_dofs
    s = SavState(u=np.zeros(n), v=np.zeros(n), r=math.sqrt(1.0), u_prev=None, step=0, tau=0.1)
    assert discrete_energy(ctx, s) == pytest.approx(1.0, abs=1e-15)
    v = ctx.space.interpolate(bump2d).coeffs
    a = SavState(u=np.zeros(n), v=v, r=0.0, u_prev=None, step=0, tau=0.1)
    b = dataclasses.replace(a, v=2 * v)
    assert discrete_energy(ctx, b) == pytest.approx(2 * discrete_energy(ctx, a), rel=1e-15)


def dense_cn_step(space, lam, tau, u, v):
    """Linear wave CN step on interior dofs from the 2x2 block system, dense."""
    mass, stiff, _ = dense_assembly(space)
    free = space.free_dofs
    m = mass[np.ix_(free, free)]
    s = stiff[np.ix_(free, free)] + lam * m
    n = len(free)
    # (u1 - u0)/tau = (v1 + v0)/2 ;  M (v1 - v0)/tau = -S (u1 + u0)/2
    lhs = np.block([[np.eye(n) / tau, -np.eye(n) / 2], [s / 2, m / tau]])
    rhs = np.concatenate([u[free] / tau + v[free] / 2, m @ v[free] / tau - s @ u[free] / 2])
    sol = np.linalg.solve(lhs, rhs)
    un, vn = np.zeros_like(u), np.zeros_like(v)
    un[free], vn[free] = sol[:n], sol[n:]
    return un, vn


@pytest.mark.parametrize("m, degree, lam", [(2, 1, 0.0), (4, 1, 0.0), (3, 2, 0.7)])
def test_linear_step_matches_dense_block_cn(m, degree, lam):
    space = make_space(2, m, degree)
    tau = 0.3
    ctx = make_context(space, linear_problem(lam), tau)
    s0 = init_state(ctx)
    s1 = sav_step(ctx, s0)
    s2 = sav_step(ctx, s1)
    u1, v1 = dense_cn_step(space, lam, tau, s0.u, s0.v)
    u2, v2 = dense_cn_step(space, lam, tau, u1, v1)
    np.testing.assert_allclose(s1.u, u1, atol=1e-10)
    np.testing.assert_allclose(s2.u, u2, atol=1e-10)
    np.testing.assert_allclose(s2.v, v2, atol=1e-10)


def test_linear_reduction_sav_equals_lcn():
    ctx = make_context(make_space(2, 6, 2), linear_problem(0.3), 0.2)
    a = b = init_state(ctx)
    for _ in range(5):
        a, b = sav_step(ctx, a), lcn_step(ctx, b)
        np.testing.assert_allclose(a.u, b.u, atol=1e-12)
        np.testing.assert_allclose(a.v, b.v, atol=1e-12)


def test_update_identities():
    ctx = make_context(make_space(2, 6, 1), klein_gordon_2d(), 0.25)
    state = init_state(ctx)
    for _ in range(3):
        b = sav_coupling(ctx, state)
        new = sav_step(ctx, state)
        assert new.r == state.r + 0.5 * float(b @ (new.u - state.u))
        lhs = (new.u - state.u) / ctx.tau
        rhs = (new.v + state.v) / 2
        np.testing.assert_allclose(lhs, rhs, rtol=0, atol=8 * np.finfo(float).eps * np.abs(lhs).max())
        state = new


def test_step_satisfies_full_variational_equation():
    p = klein_gordon_2d()
    ctx = make_context(make_space(2, 8, 2), p, 0.125)
    state = sav_step(ctx, init_state(ctx))
    tau = ctx.tau
    b = sav_coupling(ctx, state)
    new = sav_step(ctx, state)
    mass, stiff = ctx.mass.csr, ctx.stiffness.csr
    lhs = 4 * mass @ new.u + tau**2 * stiff @ new.u + tau**2 / 2 * (b @ new.u) * b
    src = assemble_load(ctx.space, lambda x: p.source(x, (state.step + 0.5) * tau))
    rhs = (4 * mass @ state.u - tau**2 * stiff @ state.u + 4 * tau * mass @ state.v
           - 2 * tau**2 * state.r * b + tau**2 / 2 * (b @ state.u) * b + 2 * tau**2 * src)
    free = ctx.space.free_dofs
    res = np.linalg.norm((lhs - rhs)[free]) / np.linalg.norm(rhs[free])
    assert res <= 10 * ctx.tol


def test_init_state_klein_gordon():
    p = klein_gordon_2d()
    ctx = make_context(make_space(2, 8, 1), p, 0.125)
    s = init_state(ctx)
    integral, _ = integrate.dblquad(
        lambda y, x: p.big_f(p.u0(np.array([[x, y]])))[0], 0, 1, 0, 1, epsabs=1e-14, epsrel=1e-13
    )
    assert s.r == pytest.approx(math.sqrt(1 + integral), rel=1e-12)
    np.testing.assert_allclose(s.v, -s.u, atol=1e-12)
    assert s.step == 0 and s.u_prev is None


def test_one_step_energy_conservation():
    ctx = make_context(make_space(2, 8, 1), conservation_variant(klein_gordon_2d()), 1 / 8)
    s0 = init_state(ctx)
    e0 = discrete_energy(ctx, s0)
    assert discrete_energy(ctx, sav_step(ctx, s0)) == pytest.approx(e0, rel=1e-10)


@pytest.mark.parametrize("lam, bc", [(0.0, "dirichlet"), (2.5, "dirichlet"), (1.0, "periodic")])
@pytest.mark.parametrize("tau", [0.05, 10.0])
def test_conservation_synthetic(lam, bc, tau):
    ctx = make_context(make_space(2, 6, 2, bc), quartic_problem(lam, bc), tau)
    _, trace = run(ctx, "sav", 12)
    e = np.array([row[2] for row in trace])
    assert np.max(np.abs(e - e[0])) / e[0] <= 1e-10


@pytest.mark.parametrize("tau", [0.1, 10.0])
def test_conservation_catalog(tau):
    for p, m in ((klein_gordon_2d(), 10), (sine_gordon_3d(), 5)):
        ctx = make_context(make_space(p.dim, m, 1), conservation_variant(p), tau)
        _, trace = run(ctx, "sav", 10)
        e = np.array([row[2] for row in trace])
        assert np.max(np.abs(e - e[0])) / e[0] <= 1e-10


def test_run_contract():
    ctx = make_context(make_space(2, 4, 1), klein_gordon_2d(), 0.1)
    state, trace = run(ctx, "sav", 1)
    direct = sav_step(ctx, init_state(ctx))
    np.testing.assert_array_equal(state.u, direct.u)
    assert len(trace) == 2 and trace[1][:2] == (1, 0.1)
    _, trace = run(ctx, "lcn", 3)
    assert [row[0] for row in trace] == [0, 1, 2, 3]
    _, none = run(ctx, "sav", 2, record_energy=False)
    assert none == []
    with pytest.raises(ConfigurationError):
        run(ctx, "sav", 0)
    with pytest.raises(ConfigurationError):
        run(ctx, "rk4", 1)


def test_positivity_violation_names_c0():
    p = dataclasses.replace(klein_gordon_2d(), c0=-0.5)
    ctx = make_context(make_space(2, 4, 1), p, 0.1)
    with pytest.raises(ConfigurationError, match="c0"):
        init_state(ctx)


def test_second_order_in_time():
    # P2 on a fixed fine mesh: spatial error ~3e-7, far below the temporal error at these steps
    p = klein_gordon_2d()
    space = make_space(2, 16, 2)
    errors = []
    for n in (4, 8):
        ctx = make_context(space, p, 1.0 / n)
        state, _ = run(ctx, "sav", n, record_energy=False)
        errors.append(l2_error(space, FeFunction(space, state.u), lambda x: p.exact(x, 1.0)))
    order = math.log2(errors[0] / errors[1])
    assert order == pytest.approx(2.0, abs=0.2)
