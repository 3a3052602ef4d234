import numpy as np
import pytest

from gnesolve.errors import ValidationError
from gnesolve.params import AlgoParams, exact_schedule, inverse_square


def test_uniform_builder(eq_game, pair_graph):
    game, _ = eq_game
    params = AlgoParams.uniform(game, pair_graph, 10.0, 0.5, 0.5, 1.1)
    assert params.r_min_eig() == pytest.approx(10.0)
    assert params.H.shape == (2, 1, 1) and params.W.shape == (1, 1, 1)
    assert params.h_is_diagonal()


def test_rho_bounds(eq_game, pair_graph):
    game, _ = eq_game
    for bad in (0.99, 2.0, 2.1):
        with pytest.raises(ValidationError, match=r"\[1, 2\)"):
            AlgoParams.uniform(game, pair_graph, 10.0, 0.5, 0.5, bad)
    AlgoParams.uniform(game, pair_graph, 10.0, 0.5, 0.5, 1.0)   # boundary ok


def test_non_spd_blocks_rejected(eq_game, pair_graph):
    game, _ = eq_game
    with pytest.raises(ValidationError, match="R\\[0\\]"):
        AlgoParams([np.array([[-1.0]]), np.array([[1.0]])],
                   np.ones((2, 1, 1)), np.ones((1, 1, 1)), 1.1)
    with pytest.raises(ValidationError, match="H\\[1\\]"):
        AlgoParams([np.eye(1), np.eye(1)],
                   np.stack([np.eye(1), -np.eye(1)]), np.ones((1, 1, 1)), 1.1)
    asym = np.array([[1.0, 0.5], [-0.5, 1.0]])
    with pytest.raises(ValidationError, match="symmetric"):
        AlgoParams([asym, np.eye(2)],
                   np.ones((2, 1, 1)), np.ones((1, 1, 1)), 1.1)


def test_mu_schedules():
    mu = inverse_square(1.0)
    assert mu(1) == 1.0 and mu(2) == 0.25 and mu(10) == pytest.approx(0.01)
    assert sum(mu(k) for k in range(1, 10000)) < 1.6449341   # pi^2/6
    zero = exact_schedule()
    assert zero(1) == 0.0 and zero(100) == 0.0


def test_apply_blocks(eq_game, pair_graph):
    game, _ = eq_game
    params = AlgoParams.uniform(game, pair_graph, 3.0, 0.5, 0.25, 1.0)
    v = np.array([1.0, -2.0])
    assert np.allclose(params.apply_R(game, v), 3.0 * v)
    rows = np.array([[2.0], [4.0]])
    assert np.allclose(params.apply_H(rows), 0.5 * rows)
    assert np.allclose(params.apply_Hinv(rows), 2.0 * rows)
    assert np.allclose(params.apply_W(np.array([[8.0]])), np.array([[2.0]]))


def test_dense_forms(eq_game, pair_graph):
    game, _ = eq_game
    params = AlgoParams.uniform(game, pair_graph, 3.0, 0.5, 0.25, 1.0)
    assert np.array_equal(params.dense_R(game), 3.0 * np.eye(2))
    assert np.array_equal(params.dense_H(), 0.5 * np.eye(2))
    assert np.array_equal(params.dense_W(), 0.25 * np.eye(1))
