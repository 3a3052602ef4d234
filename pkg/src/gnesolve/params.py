"""Step-size matrices, relaxation factor, and inner-tolerance schedules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import StructuralError, ValidationError
from .games import Game
from .graphs import CommGraph

MuSchedule = Callable[[int], float]


def inverse_square(mu0: float = 1.0) -> MuSchedule:
    """Summable inner-tolerance schedule ``mu_k = mu0 / k^2`` (k >= 1)."""
    def mu(k: int) -> float:
        return mu0 / float(k * k)
    mu.description = f"{mu0}/k^2"
    return mu


def exact_schedule() -> MuSchedule:
    """Tolerance identically zero: subgames solved to machine precision."""
    def mu(k: int) -> float:
        return 0.0
    mu.description = "0"
    return mu


def _check_spd(M: np.ndarray, name: str) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise StructuralError(f"{name} must be square, got shape {M.shape}")
    if not np.array_equal(M, M.T):
        if np.abs(M - M.T).max() > 1e-12 * (1.0 + np.abs(M).max()):
            raise ValidationError(f"{name} is not symmetric")
    smallest = np.linalg.eigvalsh(0.5 * (M + M.T)).min()
    if smallest <= 0.0:
        raise ValidationError(
            f"{name} is not positive definite (smallest eigenvalue {smallest:.3g})")


@dataclass
class AlgoParams:
    """Per-player and per-edge SPD step matrices plus the relaxation factor.

    Attributes
    ----------
    R : list of (n_i, n_i) arrays
        Proximal weights, one per player.
    H : (N, m, m) array
        Multiplier step matrices, one per player.
    W : (M, m, m) array
        Edge step matrices, one per edge.
    rho : float
        Relaxation/extrapolation factor in [1, 2).
    mu : callable
        Inner-solve tolerance schedule evaluated at the 1-based outer
        iteration index; must be nonnegative and summable.
    """

    R: list
    H: np.ndarray
    W: np.ndarray
    rho: float
    mu: MuSchedule = field(default_factory=inverse_square)

    def __post_init__(self):
        self.R = [np.atleast_2d(np.asarray(Ri, dtype=float)) for Ri in self.R]
        self.H = np.asarray(self.H, dtype=float)
        self.W = np.asarray(self.W, dtype=float)
        for i, Ri in enumerate(self.R):
            _check_spd(Ri, f"R[{i}]")
        if self.H.ndim != 3 or self.H.shape[1] != self.H.shape[2]:
            raise StructuralError("H must be an (N, m, m) array")
        if self.W.ndim != 3 or self.W.shape[1] != self.W.shape[2]:
            raise StructuralError("W must be an (M, m, m) array")
        for i in range(self.H.shape[0]):
            _check_spd(self.H[i], f"H[{i}]")
        for l in range(self.W.shape[0]):
            _check_spd(self.W[l], f"W[{l}]")
        if not (1.0 <= self.rho < 2.0):
            raise ValidationError(
                f"relaxation factor rho={self.rho} outside [1, 2)")

    # -- constructors --------------------------------------------------------

    @classmethod
    def uniform(cls, game: Game, graph: CommGraph, r: float, h: float,
                w: float, rho: float, mu: MuSchedule | None = None) -> "AlgoParams":
        """Scalar step sizes replicated into identity blocks."""
        m = game.m
        R = [r * np.eye(p.dim) for p in game.players]
        H = np.stack([h * np.eye(m)] * game.n_players)
        W = np.stack([w * np.eye(m)] * graph.n_edges)
        return cls(R, H, W, rho, mu if mu is not None else inverse_square())

    @classmethod
    def diagonal(cls, r_diags: Sequence[np.ndarray], h_diags: np.ndarray,
                 w_diags: np.ndarray, rho: float,
                 mu: MuSchedule | None = None) -> "AlgoParams":
        R = [np.diag(np.asarray(d, dtype=float)) for d in r_diags]
        H = np.stack([np.diag(np.asarray(d, dtype=float)) for d in h_diags])
        W = np.stack([np.diag(np.asarray(d, dtype=float)) for d in w_diags])
        return cls(R, H, W, rho, mu if mu is not None else inverse_square())

    # -- block applications ---------------------------------------------------

    def apply_R(self, game: Game, v: np.ndarray) -> np.ndarray:
        """Blockwise product ``R v`` on a stacked profile vector."""
        out = np.empty_like(v)
        for Ri, o, d in zip(self.R, game.offsets, game.dims):
            out[o:o + d] = Ri @ v[o:o + d]
        return out

    def apply_H(self, rows: np.ndarray) -> np.ndarray:
        """Per-player products ``H_i rows_i`` on an (N, m) array."""
        return np.einsum("nij,nj->ni", self.H, rows)

    def apply_Hinv(self, rows: np.ndarray) -> np.ndarray:
        return np.stack([np.linalg.solve(Hi, ri) for Hi, ri in zip(self.H, rows)])

    def apply_W(self, rows: np.ndarray) -> np.ndarray:
        """Per-edge products ``W_l rows_l`` on an (M, m) array."""
        return np.einsum("lij,lj->li", self.W, rows)

    def r_min_eig(self) -> float:
        return min(np.linalg.eigvalsh(Ri).min() for Ri in self.R)

    def r_max_eig(self) -> float:
        return max(np.linalg.eigvalsh(Ri).max() for Ri in self.R)

    def h_is_diagonal(self) -> bool:
        return all(np.count_nonzero(Hi - np.diag(np.diag(Hi))) == 0 for Hi in self.H)

    # -- dense forms for desk-scale validation --------------------------------

    def dense_R(self, game: Game) -> np.ndarray:
        R = np.zeros((game.n, game.n))
        for Ri, o, d in zip(self.R, game.offsets, game.dims):
            R[o:o + d, o:o + d] = Ri
        return R

    def dense_H(self) -> np.ndarray:
        N, m, _ = self.H.shape
        out = np.zeros((N * m, N * m))
        for i in range(N):
            out[i * m:(i + 1) * m, i * m:(i + 1) * m] = self.H[i]
        return out

    def dense_W(self) -> np.ndarray:
        M, m, _ = self.W.shape
        out = np.zeros((M * m, M * m))
        for l in range(M):
            out[l * m:(l + 1) * m, l * m:(l + 1) * m] = self.W[l]
        return out
