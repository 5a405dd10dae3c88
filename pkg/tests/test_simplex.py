import numpy as np
import pytest
from scipy.optimize import linprog

from jointra.kernels import get_backend
from jointra.simplex import solve_lp

BACKENDS = ["python", "cython"]


@pytest.mark.parametrize("backend", BACKENDS)
def test_small_packing(backend):
    # x1 + x2 <= 1, x2 + x3 <= 1, max x1 + 2 x2 + x3
    res = solve_lp([1, 2, 1], np.zeros((0, 3)), [[1, 1, 0], [0, 1, 1]],
                   backend=get_backend(backend))
    assert res.status == "optimal"
    assert res.value == pytest.approx(2.0)


@pytest.mark.parametrize("backend", BACKENDS)
def test_infeasible(backend):
    res = solve_lp([1, 1], [[1, 0], [1, 0]], np.zeros((0, 2)), b_eq=[1, 2],
                   backend=get_backend(backend))
    assert res.status == "infeasible"


@pytest.mark.parametrize("backend", BACKENDS)
def test_unbounded(backend):
    res = solve_lp([1, 0], [[0, 1]], np.zeros((0, 2)), backend=get_backend(backend))
    assert res.status == "unbounded"


def test_negative_rhs_rejected():
    with pytest.raises(ValueError):
        solve_lp([1], [[1]], np.zeros((0, 1)), b_eq=[-1])


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("seed", range(40))
def test_against_reference_solver(backend, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 14))
    m_eq, m_le = int(rng.integers(1, 4)), int(rng.integers(1, 5))
    a_eq = (rng.random((m_eq, n)) < 0.5).astype(float)
    a_eq[:, 0] = 1.0  # keeps x = e_0 feasible
    a_le = (rng.random((m_le, n)) < 0.4).astype(float)
    a_le[:, 0] = 0.0
    c = rng.integers(0, 4, n).astype(float)  # integer rewards: many ties and degeneracy
    res = solve_lp(c, a_eq, a_le, backend=get_backend(backend))
    ref = linprog(-c, A_ub=a_le, b_ub=np.ones(m_le), A_eq=a_eq, b_eq=np.ones(m_eq),
                  bounds=(0, None), method="highs")
    if ref.status == 2:
        assert res.status == "infeasible"
        return
    if ref.status == 3:
        assert res.status == "unbounded"
        return
    assert res.status == "optimal"
    assert res.value == pytest.approx(-ref.fun, abs=1e-8)
    assert np.allclose(a_eq @ res.x, 1, atol=1e-8)
    assert np.all(a_le @ res.x <= 1 + 1e-8)
    assert np.all(res.x >= -1e-10)
