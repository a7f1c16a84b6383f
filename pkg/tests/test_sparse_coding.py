import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from grassclust.errors import InputError
from grassclust.sparse_coding import ConvergenceWarning, SparseCodingProblem, prox_affine_l1, solve


def grid_oracle(prob, step=1e-3, half_width=3.0, centre=None):
    """Minimum of the objective over the plane sum(a) = 1, on a square grid of (a1, a2)."""
    c = np.zeros(2) if centre is None else np.asarray(centre)
    g1 = np.arange(c[0] - half_width, c[0] + half_width + step / 2, step)
    best = np.inf
    for a1 in np.array_split(g1, max(1, g1.size // 200)):
        A1, A2 = np.meshgrid(a1, np.arange(c[1] - half_width, c[1] + half_width + step / 2, step), indexing="ij")
        alpha = np.stack([A1, A2, 1.0 - A1 - A2], axis=-1)
        r = prob.target - alpha @ prob.atoms
        f = np.einsum("...i,...i->...", r, r) + np.abs(alpha) @ prob.penalties
        best = min(best, float(f.min()))
    return best


def random_problem(rng, n_atoms=3, dim=3):
    atoms = rng.standard_normal((n_atoms, dim))
    target = rng.standard_normal(dim)
    return SparseCodingProblem(target, atoms, rng.uniform(0.05, 1.5, n_atoms))


def test_single_atom():
    res = solve(SparseCodingProblem([1.0, 2.0], [[3.0, -1.0]], [0.7]))
    np.testing.assert_array_equal(res.alpha, [1.0])


def test_opposite_atoms_split_evenly():
    v = np.array([1.0, -2.0, 0.5])
    res = solve(SparseCodingProblem(np.zeros(3), np.stack([v, -v]), [0.3, 0.3]))
    np.testing.assert_allclose(res.alpha, [0.5, 0.5], atol=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_grid_oracle(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    res = solve(prob)
    # coarse global sweep, then a fine sweep around the coarse minimiser region
    coarse = grid_oracle(prob, step=1e-2, half_width=4.0)
    fine = grid_oracle(prob, step=1e-3, half_width=0.25, centre=res.alpha[:2])
    assert abs(res.objective - min(coarse, fine)) < 1e-4
    assert res.objective <= coarse + 1e-9


def test_constraint_on_random_instances():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        prob = random_problem(rng, n_atoms=int(rng.integers(2, 12)), dim=int(rng.integers(2, 20)))
        worst = max(worst, abs(solve(prob).alpha.sum() - 1.0))
    assert worst <= 1e-8


def test_objective_trace_monotone(rng):
    res = solve(random_problem(rng, 8, 10))
    assert all(b <= a + 1e-12 for a, b in zip(res.trace, res.trace[1:]))


def test_zero_atoms_degenerate():
    res = solve(SparseCodingProblem(np.ones(3), np.zeros((4, 3)), np.ones(4)))
    assert res.degenerate
    np.testing.assert_allclose(res.alpha, 0.25)


def test_iteration_cap_warns(rng):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = solve(random_problem(rng, 10, 10), tol=1e-15, max_iter=3)
    assert not res.converged
    assert any(issubclass(w.category, ConvergenceWarning) for w in caught)


def test_bad_inputs():
    with pytest.raises(InputError):
        SparseCodingProblem([1.0], np.empty((0, 1)), [])
    with pytest.raises(InputError):
        SparseCodingProblem([1.0, 2.0], [[1.0]], [1.0])
    with pytest.raises(InputError):
        SparseCodingProblem([1.0], [[1.0]], [-1.0])


def test_neighbor_penalties():
    prob = SparseCodingProblem.from_neighbors([0.0, 0.0], [[3.0, 4.0]], sigma_alpha=5.0)
    assert prob.penalties[0] == pytest.approx(np.e)


def prox_oracle(v, w):
    # the prox is a strongly convex problem on a line-constrained set; check it via KKT
    a = prox_affine_l1(v, w)
    g = v - a  # = mu + w * subgradient
    active = a != 0
    mu = np.median((g - w * np.sign(a))[active]) if active.any() else np.median(g)
    return a, g, mu


@given(arrays(np.float64, 5, elements=st.floats(-3, 3)), arrays(np.float64, 5, elements=st.floats(0, 2)))
def test_prox_kkt(v, w):
    a, g, mu = prox_oracle(v, w)
    assert abs(a.sum() - 1.0) < 1e-9
    active = a != 0
    np.testing.assert_allclose(g[active], mu + w[active] * np.sign(a[active]), atol=1e-7)
    assert np.all(np.abs(g[~active] - mu) <= w[~active] + 1e-7)
