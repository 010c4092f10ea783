"""Connectivity quality metrics.

Two families live here:

* graph-theoretic metrics on a distance-weighted graph (step-shape weights,
  algebraic connectivity, number of simple paths), and
* metrics derived from the radio channel model (Shannon capacity, end-to-end
  PER of a decode-and-forward relay chain).

Graphs are allowed to be directed; spectral metrics refuse asymmetric weights
instead of symmetrising them behind the caller's back.
"""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

MAX_PATH_ENUM_NODES = 12
_SYM_ATOL = 1e-12


@dataclass(frozen=True)
class StepWeightParams:
    threshold_x_th: float

    def __post_init__(self):
        if not self.threshold_x_th > 0:
            raise ValueError("threshold_x_th must be > 0")


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Dense weight matrix ``weights[i, j]`` for the edge i -> j."""

    weights: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weights must be a square matrix")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        if np.any(np.diag(w) != 0):
            raise ValueError("self-loops are not allowed (diagonal must be zero)")
        if self.symmetric and not np.allclose(w, w.T, rtol=0, atol=_SYM_ATOL):
            raise ValueError("graph flagged symmetric but weights are not")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]

    def is_symmetric(self) -> bool:
        return bool(np.allclose(self.weights, self.weights.T, rtol=0, atol=_SYM_ATOL))

    def laplacian(self) -> np.ndarray:
        """``D - W`` with D the diagonal of out-degree (row) sums."""
        return np.diag(self.weights.sum(axis=1)) - self.weights

    def __str__(self) -> str:
        lines = []
        for i in range(self.n_nodes):
            nbrs = ", ".join(f"{j}:{self.weights[i, j]:g}"
                             for j in range(self.n_nodes) if self.weights[i, j] > 0)
            lines.append(f"{i} -> {nbrs}" if nbrs else f"{i} ->")
        return "\n".join(lines)


def step_weight(d: float, p: StepWeightParams) -> float:
    """1 if ``d < x_th`` else 0 (the threshold distance itself is disconnected)."""
    if d < 0:
        raise ValueError("distance must be >= 0")
    return 1.0 if d < p.threshold_x_th else 0.0


def build_graph(positions: Sequence[Sequence[float]],
                f: Callable[..., float], symmetric: bool = True) -> WeightedGraph:
    """Weight every ordered pair of distinct nodes by ``f`` of their distance.

    ``f`` is called as ``f(d)``; if it accepts three arguments it is called as
    ``f(d, i, j)`` so that direction-dependent weights can be expressed.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[0] < 2:
        raise ValueError("need at least two node positions")
    n = pos.shape[0]
    try:
        directed = len(inspect.signature(f).parameters) >= 3
    except (TypeError, ValueError):
        directed = False
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                d = float(np.linalg.norm(pos[i] - pos[j]))
                w[i, j] = f(d, i, j) if directed else f(d)
    return WeightedGraph(w, symmetric=symmetric and np.allclose(w, w.T, rtol=0, atol=_SYM_ATOL))


def algebraic_connectivity(g: WeightedGraph) -> float:
    """Second-smallest Laplacian eigenvalue (Fiedler value) of a symmetric graph."""
    if not g.is_symmetric():
        raise ValueError("algebraic connectivity needs symmetric weights")
    lam = np.linalg.eigvalsh(g.laplacian())
    lam2 = float(lam[1])
    # clamp round-off around the zero eigenvalue of disconnected graphs
    return 0.0 if abs(lam2) < 1e-12 * max(1.0, float(lam[-1])) else lam2


def num_simple_paths(g: WeightedGraph, s: int, t: int,
                     max_nodes: int = MAX_PATH_ENUM_NODES) -> int:
    """Count simple directed paths from ``s`` to ``t`` over positive-weight edges."""
    n = g.n_nodes
    if n > max_nodes:
        raise ValueError(f"path enumeration capped at {max_nodes} nodes, graph has {n}")
    if not (0 <= s < n and 0 <= t < n):
        raise IndexError("node index out of range")
    if s == t:
        raise ValueError("source and target must differ")
    adj = [np.flatnonzero(g.weights[i] > 0).tolist() for i in range(n)]
    visited = [False] * n

    def dfs(u: int) -> int:
        if u == t:
            return 1
        visited[u] = True
        total = 0
        for v in adj[u]:
            if not visited[v]:
                total += dfs(v)
        visited[u] = False
        return total

    return dfs(s)


def capacity(gamma_bar, B: float):
    """Shannon capacity ``B * log2(1 + gamma)`` in bit/s."""
    gamma_bar = np.asarray(gamma_bar, dtype=float)
    if np.any(gamma_bar < 0):
        raise ValueError("SNR must be >= 0")
    out = B * np.log2(1.0 + gamma_bar)
    return float(out) if out.ndim == 0 else out


def e2e_per(p1: float, p2: float) -> float:
    """End-to-end PER of two decode-and-forward hops: ``1 - (1-p1)(1-p2)``."""
    for p in (p1, p2):
        if not 0.0 <= p <= 1.0 or math.isnan(p):
            raise ValueError(f"PER must lie in [0, 1], got {p!r}")
    # p1 + p2 - p1*p2 is symmetric and exact for a zero argument; the clamp
    # keeps the bounds max(p1, p2) <= result <= 1 under round-off
    return min(1.0, max(p1 + p2 - p1 * p2, p1, p2))
