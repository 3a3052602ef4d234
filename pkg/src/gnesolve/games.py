"""Game model: players with box constraints, affine coupling blocks, and
pseudo-gradient oracles.

A game couples ``N`` players through an affine constraint on the sum of the
per-player terms ``A_i x_i``.  Each player supplies a selection oracle for
the subdifferential of its objective in its own variable; the stacked
selection is the game's pseudo-gradient.  Only box-shaped private sets are
supported, which keeps projections exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NumericError, StructuralError, ValidationError
from .rng import SplitMix64

EQUALITY = "equality"
INEQUALITY = "inequality"

#: oracle signature: (own block, concatenation of the other blocks in player
#: order) -> subgradient selection for the own block
Oracle = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise StructuralError(f"{name} must be a 1-d vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with nonempty interior."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _vector(self.lower, "lower")
        upper = _vector(self.upper, "upper")
        if lower.shape != upper.shape:
            raise StructuralError("box bounds must have equal length")
        if not np.all(lower < upper):
            raise ValidationError("box must satisfy lower < upper componentwise")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    def project(self, v: np.ndarray) -> np.ndarray:
        """Euclidean projection (componentwise clamp)."""
        v = _vector(v, "v")
        if v.size != self.dim:
            raise StructuralError(f"expected length {self.dim}, got {v.size}")
        return np.clip(v, self.lower, self.upper)

    def inflate(self, fraction: float) -> "Box":
        """Box enlarged by `fraction` of the width on each side.

        Relaxation steps with ``rho > 1`` extrapolate iterates slightly
        outside the feasible box; objective oracles are expected to remain
        well defined on this enlarged box.
        """
        width = self.upper - self.lower
        return Box(self.lower - fraction * width, self.upper + fraction * width)

    def contains(self, v: np.ndarray, tol: float = 0.0) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.all(v >= self.lower - tol) and np.all(v <= self.upper + tol))

    def sample(self, rng: SplitMix64) -> np.ndarray:
        return np.array([rng.uniform(lo, hi) for lo, hi in zip(self.lower, self.upper)])


@dataclass(frozen=True)
class Player:
    """One player: decision dimension, oracle, coupling block, private box."""

    dim: int
    oracle: Oracle
    A: np.ndarray
    b: np.ndarray
    box: Box

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = _vector(self.b, "b")
        if self.dim < 1:
            raise ValidationError("player dimension must be positive")
        if A.shape[1] != self.dim:
            raise StructuralError(f"A has {A.shape[1]} columns, expected {self.dim}")
        if b.size != A.shape[0]:
            raise StructuralError("b length must equal the row count of A")
        if self.box.dim != self.dim:
            raise StructuralError("box dimension must equal the player dimension")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class StackedDecision:
    """Decision profile stored as per-player blocks."""

    blocks: tuple

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([np.asarray(b, dtype=float) for b in self.blocks])

    @classmethod
    def from_vector(cls, game: "Game", x: np.ndarray) -> "StackedDecision":
        return cls(tuple(game.split(x)))


def as_vector(x) -> np.ndarray:
    """Accept a flat array or a StackedDecision and return the flat array."""
    if isinstance(x, StackedDecision):
        return x.vector
    return np.asarray(x, dtype=float)


class Game:
    """Immutable monotone game with an affine coupling constraint.

    Parameters
    ----------
    players : sequence of Player
        Player data in fixed order; player ``i`` also owns node ``i`` of the
        communication graph.
    kind : str
        ``"equality"`` for ``sum A_i x_i = sum b_i`` or ``"inequality"``
        for ``sum A_i x_i <= sum b_i``.
    profile_oracle : callable, optional
        Vectorized pseudo-gradient ``x -> F(x)`` over the full profile.
        When given it must agree with the per-player oracles; it is used as
        a fast path by the inner solvers.
    exact_subgame_solver : callable, optional
        ``(anchor, shift, R_blocks) -> x_hat`` returning the exact
        equilibrium of the proximally regularized subgame.  Supplied by
        generators of games whose regularized equilibrium has a closed form.
    generator : dict, optional
        Metadata echoed into the JSON serialization so that the instance can
        be rebuilt (name of the generating family plus its parameters).
    lipschitz_hint : float, optional
        Estimate of the Lipschitz constant of the bare pseudo-gradient,
        used to pick default inner step sizes.
    smooth_oracle, separable_prox : callables, optional
        Splitting structure for objectives with a separable nonsmooth part:
        ``smooth_oracle(x)`` returns the stacked gradient of the smooth
        part, and ``separable_prox(v, gamma)`` the proximal map of the
        nonsmooth part plus the box indicator.  When present, natural-map
        residuals and inner forward-backward steps handle kinks exactly
        instead of relying on the single-valued selection.
    """

    def __init__(self, players: Sequence[Player], kind: str,
                 profile_oracle=None, exact_subgame_solver=None,
                 generator: dict | None = None,
                 lipschitz_hint: float | None = None,
                 smooth_oracle=None, separable_prox=None):
        if kind not in (EQUALITY, INEQUALITY):
            raise ValidationError(f"unknown coupling kind {kind!r}")
        players = tuple(players)
        if not players:
            raise ValidationError("a game needs at least one player")
        m = players[0].A.shape[0]
        for i, p in enumerate(players):
            if p.A.shape[0] != m:
                raise StructuralError(
                    f"player {i} has {p.A.shape[0]} coupling rows, expected {m}")
        self.players = players
        self.kind = kind
        self.m = m
        self.n_players = len(players)
        self.dims = tuple(p.dim for p in players)
        self.n = sum(self.dims)
        self.offsets = tuple(np.cumsum((0,) + self.dims[:-1]))
        self.profile_oracle = profile_oracle
        self.exact_subgame_solver = exact_subgame_solver
        self.generator = dict(generator) if generator else {"name": "opaque"}
        self.lipschitz_hint = lipschitz_hint
        if (smooth_oracle is None) != (separable_prox is None):
            raise ValidationError(
                "smooth_oracle and separable_prox must be supplied together")
        self.smooth_oracle = smooth_oracle
        self.separable_prox = separable_prox
        self._lower = np.concatenate([p.box.lower for p in players])
        self._upper = np.concatenate([p.box.upper for p in players])

    # -- profile helpers ---------------------------------------------------

    def split(self, x) -> list[np.ndarray]:
        x = as_vector(x)
        if x.size != self.n:
            raise StructuralError(f"profile length {x.size}, expected {self.n}")
        return [x[o:o + d] for o, d in zip(self.offsets, self.dims)]

    def project(self, x) -> np.ndarray:
        """Projection onto the product of the private boxes."""
        x = as_vector(x)
        return np.clip(x, self._lower, self._upper)

    def sample_profile(self, rng: SplitMix64) -> np.ndarray:
        return np.concatenate([p.box.sample(rng) for p in self.players])

    @property
    def box_lower(self) -> np.ndarray:
        return self._lower

    @property
    def box_upper(self) -> np.ndarray:
        return self._upper

    # -- oracles -----------------------------------------------------------

    def pseudo_gradient(self, x) -> np.ndarray:
        """Stacked subgradient selection of all players at profile ``x``."""
        x = as_vector(x)
        blocks = self.split(x)
        if self.profile_oracle is not None:
            g = np.asarray(self.profile_oracle(x), dtype=float)
            if g.shape != (self.n,):
                raise StructuralError(
                    f"profile oracle returned shape {g.shape}, expected ({self.n},)")
        else:
            parts = []
            for i, p in enumerate(self.players):
                others = np.concatenate(
                    [blocks[j] for j in range(self.n_players) if j != i]
                ) if self.n_players > 1 else np.empty(0)
                gi = np.asarray(p.oracle(blocks[i], others), dtype=float)
                if gi.shape != (p.dim,):
                    raise StructuralError(
                        f"player {i} oracle returned shape {gi.shape}, "
                        f"expected ({p.dim},)")
                parts.append(gi)
            g = np.concatenate(parts)
        if not np.all(np.isfinite(g)):
            raise NumericError("pseudo-gradient has non-finite entries")
        return g

    def pseudo_gradient_blockwise(self, x) -> np.ndarray:
        """Same selection but always through the per-player oracles."""
        x = as_vector(x)
        blocks = self.split(x)
        parts = []
        for i, p in enumerate(self.players):
            others = np.concatenate(
                [blocks[j] for j in range(self.n_players) if j != i]
            ) if self.n_players > 1 else np.empty(0)
            parts.append(np.asarray(p.oracle(blocks[i], others), dtype=float))
        g = np.concatenate(parts)
        if not np.all(np.isfinite(g)):
            raise NumericError("pseudo-gradient has non-finite entries")
        return g

    # -- coupling-constraint helpers ----------------------------------------

    @property
    def b_rows(self) -> np.ndarray:
        """Per-player right-hand sides stacked as an (N, m) array."""
        return np.stack([p.b for p in self.players])

    def local_residual(self, x) -> np.ndarray:
        """(N, m) array with row ``i`` equal to ``A_i x_i - b_i``."""
        blocks = self.split(x)
        return np.stack([p.A @ xi - p.b for p, xi in zip(self.players, blocks)])

    def constraint_rows(self, x) -> np.ndarray:
        """(N, m) array with row ``i`` equal to ``A_i x_i``."""
        blocks = self.split(x)
        return np.stack([p.A @ xi for p, xi in zip(self.players, blocks)])

    def price_gradient(self, lam_rows: np.ndarray) -> np.ndarray:
        """Stacked ``A_i^T lambda_i`` for per-player multipliers (N, m)."""
        lam_rows = np.asarray(lam_rows, dtype=float)
        if lam_rows.shape != (self.n_players, self.m):
            raise StructuralError(
                f"multiplier array shape {lam_rows.shape}, "
                f"expected ({self.n_players}, {self.m})")
        return np.concatenate(
            [p.A.T @ li for p, li in zip(self.players, lam_rows)])

    def coupling_gap(self, x) -> np.ndarray:
        """``sum_i A_i x_i - sum_i b_i`` (length m)."""
        return self.local_residual(x).sum(axis=0)

    # -- natural map ---------------------------------------------------------

    def natural_step(self, x, price: np.ndarray, gamma: float = 1.0) -> np.ndarray:
        """One step of the natural map for the priced game.

        For plain games this is the box projection of a pseudo-gradient
        step; for games with a splitting structure the nonsmooth part is
        absorbed into its prox, so fixed points characterize solutions even
        where the subgradient selection is discontinuous.
        """
        x = as_vector(x)
        price = as_vector(price)
        if self.separable_prox is not None:
            g = np.asarray(self.smooth_oracle(x), dtype=float)
            return self.separable_prox(x - gamma * (g + price), gamma)
        return self.project(x - gamma * (self.pseudo_gradient(x) + price))


def pseudo_subdifferential(game: Game, x) -> np.ndarray:
    """Selection of the game's pseudo-subdifferential at profile ``x``."""
    return game.pseudo_gradient(x)


def project_box(box: Box, v: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``box``."""
    return box.project(v)


@dataclass(frozen=True)
class MonotonicityReport:
    min_inner_product: float
    violations: int
    n_pairs: int


def check_monotonicity_samples(game: Game, n_pairs: int, seed: int,
                               tol: float = 1e-9) -> MonotonicityReport:
    """Sampled monotonicity audit of the pseudo-gradient.

    Draws ``n_pairs`` pairs uniformly in the product box and reports the
    minimum of ``<x - y, F(x) - F(y)>`` along with the count of pairs below
    ``-tol``.  This is an audit, not a proof: monotonicity of an arbitrary
    oracle is not verifiable from samples.
    """
    if n_pairs < 1:
        raise ValidationError("n_pairs must be at least 1")
    rng = SplitMix64(seed)
    worst = np.inf
    violations = 0
    for _ in range(n_pairs):
        x = game.sample_profile(rng)
        y = game.sample_profile(rng)
        inner = float((x - y) @ (game.pseudo_gradient(x) - game.pseudo_gradient(y)))
        worst = min(worst, inner)
        if inner < -tol:
            violations += 1
    return MonotonicityReport(worst, violations, n_pairs)


# -- serialization -----------------------------------------------------------

#: registry mapping generator names to callables ``payload -> Game``,
#: populated by the benchmark-game module at import time
_REBUILDERS: dict[str, Callable[[dict], Game]] = {}


def register_rebuilder(name: str, builder: Callable[[dict], Game]) -> None:
    _REBUILDERS[name] = builder


def game_to_dict(game: Game) -> dict:
    """Documented JSON structure for a game instance.

    Matrices are stored as row-major nested lists.  The ``generator`` block
    carries everything needed to rebuild the objective oracles.
    """
    return {
        "schema": "gnesolve-game-v1",
        "kind": game.kind,
        "m": game.m,
        "generator": game.generator,
        "players": [
            {
                "dim": p.dim,
                "A": p.A.tolist(),
                "b": p.b.tolist(),
                "lower": p.box.lower.tolist(),
                "upper": p.box.upper.tolist(),
            }
            for p in game.players
        ],
    }


def game_from_dict(data: dict) -> Game:
    """Rebuild a game from its JSON structure.

    Only instances produced by a registered generator family can be rebuilt,
    because objective oracles are code, not data.
    """
    if data.get("schema") != "gnesolve-game-v1":
        raise ValidationError("unrecognized game schema")
    name = data.get("generator", {}).get("name", "opaque")
    if name not in _REBUILDERS:
        raise ValidationError(
            f"cannot rebuild objectives for generator {name!r}; "
            "only registered builtin families are loadable")
    game = _REBUILDERS[name](data)
    # cross-check the structural payload against the rebuilt instance
    for i, (p, pd) in enumerate(zip(game.players, data["players"])):
        if (p.dim != pd["dim"] or not np.allclose(p.A, pd["A"])
                or not np.allclose(p.b, pd["b"])
                or not np.allclose(p.box.lower, pd["lower"])
                or not np.allclose(p.box.upper, pd["upper"])):
            raise ValidationError(f"player {i} payload does not match generator")
    return game


def save_game(game: Game, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(game_to_dict(game), fh, indent=1)
        fh.write("\n")


def load_game(path) -> Game:
    with open(path, encoding="utf-8") as fh:
        return game_from_dict(json.load(fh))
