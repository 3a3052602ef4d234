import pytest

import gnesolve as gs


@pytest.fixture
def pair_graph():
    return gs.path_graph(2)


@pytest.fixture
def eq_game():
    game, solution = gs.quadratic_game()
    return game, solution


@pytest.fixture
def ineq_game():
    game, solution = gs.quadratic_game(kind=gs.INEQUALITY)
    return game, solution


@pytest.fixture
def toy_params(eq_game, pair_graph):
    game, _ = eq_game
    return gs.AlgoParams.uniform(game, pair_graph, r=10.0, h=0.5, w=0.5,
                                 rho=1.1, mu=gs.exact_schedule())


@pytest.fixture
def exact_inner():
    return gs.InnerSolver(gs.InnerSettings(mode="exact"))


def edge_flow_for(game, graph, x_star):
    """Independent oracle: minimum-norm edge variables tracking b - A x."""
    return graph.edge_flow(-(game.local_residual(x_star)))
