"""Catalog of nonlinear wave problems ``u_tt = Laplace(u) - lam u - f(u) + g``.

Space maps take an ``(n, dim)`` coordinate array; space-time maps take
``(x, t)``.  Gradients return ``(n, dim)``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from savwave.errors import ConfigurationError

ScalarMap = Callable[[np.ndarray], np.ndarray]
SpaceMap = Callable[[np.ndarray], np.ndarray]
SpaceTimeMap = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class Problem:
    name: str
    dim: int
    lam: float
    big_f: ScalarMap
    little_f: ScalarMap
    c0: float
    u0: SpaceMap
    u1: SpaceMap
    exact: Optional[SpaceTimeMap] = None
    exact_grad: Optional[SpaceTimeMap] = None
    source: Optional[SpaceTimeMap] = None
    bc_kind: str = "dirichlet"
    u0_grad: Optional[SpaceMap] = None
    u1_grad: Optional[SpaceMap] = None

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigurationError(f"lambda must be nonnegative, got {self.lam}")

    @property
    def has_exact(self) -> bool:
        return self.exact is not None


def check_derivative(problem: Problem, samples: int = 61, eps: float = 1e-5) -> float:
    """Largest central-difference mismatch between ``F'`` and ``f`` on ``[-3, 3]``."""
    s = np.linspace(-3.0, 3.0, samples)
    fd = (problem.big_f(s + eps) - problem.big_f(s - eps)) / (2 * eps)
    return float(np.max(np.abs(fd - problem.little_f(s))))


def _bump(s):
    return s**2 * (1 - s) ** 2


def _bump_d1(s):
    return 2 * s * (1 - s) * (1 - 2 * s)


def _bump_d2(s):
    return 2 - 12 * s + 12 * s**2


def klein_gordon_2d() -> Problem:
    """``u_tt = u_xx + u_yy + u - u^3 + g`` with ``u = exp(-t) x^2(1-x)^2 y^2(1-y)^2``."""

    def exact(x, t):
        return np.exp(-t) * _bump(x[:, 0]) * _bump(x[:, 1])

    def exact_grad(x, t):
        px, py = _bump(x[:, 0]), _bump(x[:, 1])
        return np.exp(-t) * np.stack([_bump_d1(x[:, 0]) * py, px * _bump_d1(x[:, 1])], axis=1)

    def source(x, t):
        # u_tt = u, so g = u_tt - lap(u) - u + u^3 = -lap(u) + u^3
        px, py = _bump(x[:, 0]), _bump(x[:, 1])
        lap = np.exp(-t) * (_bump_d2(x[:, 0]) * py + px * _bump_d2(x[:, 1]))
        u = np.exp(-t) * px * py
        return -lap + u**3

    return Problem(
        name="klein-gordon-2d",
        dim=2,
        lam=0.0,
        big_f=lambda s: s**4 / 4 - s**2 / 2,
        little_f=lambda s: s**3 - s,
        c0=1.0,
        u0=lambda x: exact(x, 0.0),
        u1=lambda x: -exact(x, 0.0),
        exact=exact,
        exact_grad=exact_grad,
        source=source,
        u0_grad=lambda x: exact_grad(x, 0.0),
        u1_grad=lambda x: -exact_grad(x, 0.0),
    )


def sine_gordon_3d() -> Problem:
    """``u_tt = Laplace(u) + sin(u) + g`` with ``u = (1 + t^3) sin(2 pi x) sin(2 pi y) sin(2 pi z)``."""
    k = 2 * np.pi

    def shape(x):
        return np.sin(k * x[:, 0]) * np.sin(k * x[:, 1]) * np.sin(k * x[:, 2])

    def shape_grad(x):
        s = np.sin(k * x)
        c = np.cos(k * x)
        return k * np.stack([c[:, 0] * s[:, 1] * s[:, 2],
                             s[:, 0] * c[:, 1] * s[:, 2],
                             s[:, 0] * s[:, 1] * c[:, 2]], axis=1)

    def exact(x, t):
        return (1 + t**3) * shape(x)

    def exact_grad(x, t):
        return (1 + t**3) * shape_grad(x)

    def source(x, t):
        s = shape(x)
        u = (1 + t**3) * s
        return 6 * t * s + 3 * k**2 * u - np.sin(u)

    return Problem(
        name="sine-gordon-3d",
        dim=3,
        lam=0.0,
        big_f=np.cos,
        little_f=lambda s: -np.sin(s),
        c0=2.0,
        u0=lambda x: exact(x, 0.0),
        u1=lambda x: np.zeros(len(x)),
        exact=exact,
        exact_grad=exact_grad,
        source=source,
        u0_grad=lambda x: exact_grad(x, 0.0),
        u1_grad=lambda x: np.zeros_like(x, dtype=float),
    )


def conservation_variant(problem: Problem) -> Problem:
    """Same initial data with the source removed; the exact solution no longer applies."""
    return dataclasses.replace(problem, source=None, exact=None, exact_grad=None)


CATALOG = {
    "klein-gordon-2d": klein_gordon_2d,
    "sine-gordon-3d": sine_gordon_3d,
}


def get_problem(name: str) -> Problem:
    try:
        return CATALOG[name]()
    except KeyError:
        valid = ", ".join(sorted(CATALOG))
        raise ConfigurationError(f"unknown problem {name!r}; valid identifiers: {valid}") from None
