import numpy as np
import pytest

from savwave.element import tabulate
from savwave.fem import build_space
from savwave.mesh import build_uniform_mesh


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_space(dim, m, degree, bc="dirichlet"):
    return build_space(build_uniform_mesh(dim, m), degree, bc)


def fe_map(fn):
    """Value and exact piecewise gradient of a finite element function as space maps."""
    space = fn.space

    def locate_all(x):
        out = []
        for p in x:
            e, bary = space.mesh.locate(np.clip(p, 0.0, 1.0))
            vals, grads = tabulate(space.element, np.clip(bary, 0, None)[None, :] / np.clip(bary, 0, None).sum())
            out.append((e, vals[0], grads[0]))
        return out

    def value(x):
        return np.array([v @ fn.coeffs[space.elem_to_dof[e]] for e, v, _ in locate_all(x)])

    def grad(x):
        return np.array([(space.inv_jacobians_t[e] @ g.T) @ fn.coeffs[space.elem_to_dof[e]]
                         for e, _, g in locate_all(x)])

    return value, grad


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split('criterion ')[1].split(':')[0])):
            terminalreporter.write_line(line)
