"""Router placement planners for the sensing -> router -> base relay chain.

Three strategies share one inner problem, :func:`relay_allocation`, which
picks the two hops' AMC modes and splits the end-to-end PER budget between
them so that total transmit energy is minimal:

* :func:`comm_baseline_step` minimises communication energy only,
* :func:`single_stage_step` minimises motion + communication for the
  current step (greedy),
* :func:`multi_stage_plan` minimises the sum over the whole horizon by
  backward induction on the position grid.

All three search the same grid with the same reachability ball, so their
totals are directly comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import (ChannelParams, LinkPlan, ModeTable, _per_rayleigh_arr, _required_snr_arr,
                      noise_power, path_gain)
from .cqm import e2e_per
from .errors import InfeasibleError
from .motion import REACH_RTOL, motion_energy
from .scenario import Grid, Scenario

__all__ = [
    "LinkPlan", "StepDecision", "ValueTable", "CommMap",
    "golden_section_min", "complementary_split", "relay_allocation", "comm_map", "reach_mask", "stage_maps",
    "comm_baseline_step", "single_stage_step", "multi_stage_plan",
]

INV_PHI = (math.sqrt(5) - 1) / 2
SPLIT_RTOL = 1e-8
# router may not sit exactly on a node (zero distance has no pathloss value)
_MIN_DIST = 1e-9


@dataclass(frozen=True)
class StepDecision:
    router_pos: tuple[float, float]
    link_sr: LinkPlan
    link_rb: LinkPlan
    motion_energy: float
    comm_energy: float

    @property
    def total_energy(self) -> float:
        return self.motion_energy + self.comm_energy

    @property
    def e2e_per_budget(self) -> float:
        return e2e_per(self.link_sr.per_budget, self.link_rb.per_budget)


@dataclass
class ValueTable:
    """Backward-induction tables on the grid.

    ``values[t][c]`` is the optimal energy still to be spent from step ``t``
    on when the router sits at cell ``c`` before moving; ``best_next[t][c]``
    is the cell it should move to (-1 where no feasible continuation exists).
    ``values[T]`` is the all-zero terminal stage.
    """

    grid: Grid
    values: list[np.ndarray]
    best_next: list[np.ndarray]
    root_value: float
    root_next: int


def golden_section_min(f, a, b, rtol: float = SPLIT_RTOL):
    """Minimise a unimodal ``f`` on each interval ``[a, b]`` (vectorised).

    Iterates until every bracket is narrower than ``rtol`` times its
    starting width. Returns ``(x, f(x))`` with ``x`` the best of the final
    bracket midpoint and the two original endpoints, so minima sitting on a
    boundary are returned exactly.
    """
    a0 = np.array(a, dtype=float)
    b0 = np.array(b, dtype=float)
    a, b = a0.copy(), b0.copy()
    n_iter = int(math.ceil(math.log(rtol) / math.log(INV_PHI)))
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(n_iter):
        left = fc <= fd
        # left probe wins -> keep [a, d], else keep [c, b]
        a, b = np.where(left, a, c), np.where(left, d, b)
        c, d = (np.where(left, b - INV_PHI * (b - a), d),
                np.where(left, c, a + INV_PHI * (b - a)))
        fp = f(np.where(left, c, d))
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
    xs = np.stack([0.5 * (a + b), a0, b0])
    fs = np.stack([f(xs[0]), f(a0), f(b0)])
    k = np.argmin(fs, axis=0)
    idx = np.indices(k.shape)
    return xs[(k, *idx)], fs[(k, *idx)]


def complementary_split(eps_e2e, eps1):
    """Second-hop PER budget that makes the two-hop e2e PER exactly ``eps_e2e``."""
    return 1.0 - (1.0 - eps_e2e) / (1.0 - np.asarray(eps1, dtype=float))


@dataclass(frozen=True)
class _RelayBatch:
    energy: np.ndarray
    mode_sr: np.ndarray
    mode_rb: np.ndarray
    eps_sr: np.ndarray
    eps_rb: np.ndarray
    p_sr: np.ndarray
    p_rb: np.ndarray
    snr_sr: np.ndarray
    snr_rb: np.ndarray
    e_sr: np.ndarray
    e_rb: np.ndarray


def _relay_batch(d_sr, d_rb, eps_e2e: float, data_D: float, ch: ChannelParams,
                 tbl: ModeTable, p_max: float) -> _RelayBatch:
    """Relay allocation for many (d_sr, d_rb) pairs at once; inf energy = infeasible."""
    d_sr = np.atleast_1d(np.asarray(d_sr, dtype=float))
    d_rb = np.atleast_1d(np.asarray(d_rb, dtype=float))
    n = d_sr.size
    M = len(tbl)
    rate, a, g, gp = tbl.arrays()
    N = noise_power(ch)
    g_sr = path_gain(d_sr, ch)
    g_rb = path_gain(d_rb, ch)
    E = float(eps_e2e)

    # pair axis first, m_sr-major so argmin ties resolve to (m_sr, m_rb) order
    msr, mrb = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
    msr, mrb = msr.ravel()[:, None], mrb.ravel()[:, None]
    shape = (M * M, n)
    a1, g1, gp1, r1 = (np.broadcast_to(v[msr], shape) for v in (a, g, gp, rate))
    a2, g2, gp2, r2 = (np.broadcast_to(v[mrb], shape) for v in (a, g, gp, rate))
    G1 = np.broadcast_to(g_sr[None, :], shape)
    G2 = np.broadcast_to(g_rb[None, :], shape)

    # smallest PER each hop can reach at full power bounds the split
    eps1_min = _per_rayleigh_arr(p_max * G1 / N, a1, g1, gp1)
    eps2_min = _per_rayleigh_arr(p_max * G2 / N, a2, g2, gp2)
    # floor keeps very strong hops inside the bisection's representable range
    floor = E * 1e-9
    lo = np.maximum(eps1_min, floor)
    with np.errstate(divide="ignore"):
        # a hop with PER floor 1 gives hi = -inf, i.e. infeasible
        hi = 1.0 - (1.0 - E) / (1.0 - np.maximum(eps2_min, floor))
    feasible = (eps1_min < E) & (eps2_min < E) & (lo <= hi)
    # dummy bracket for infeasible pairs keeps the vectorised search well-defined
    mid_split = 1.0 - math.sqrt(1.0 - E)
    lo = np.where(feasible, lo, mid_split)
    hi = np.where(feasible, hi, mid_split)

    c1 = N * data_D / (G1 * r1 * ch.bandwidth_B)
    c2 = N * data_D / (G2 * r2 * ch.bandwidth_B)

    def other(e1):
        return complementary_split(E, e1)

    def cost(e1):
        s1 = _required_snr_arr(e1, a1, g1, gp1)
        s2 = _required_snr_arr(other(e1), a2, g2, gp2)
        return c1 * s1 + c2 * s2

    x, fx = golden_section_min(cost, lo, hi)
    fx = np.where(feasible, fx, np.inf)
    k = np.argmin(fx, axis=0)
    cols = np.arange(n)
    e1 = x[k, cols]
    e2 = other(e1)
    best = fx[k, cols]
    ok = np.isfinite(best)

    s1 = _required_snr_arr(np.where(ok, e1, 0.5), a[k // M], g[k // M], gp[k // M])
    s2 = _required_snr_arr(np.where(ok, e2, 0.5), a[k % M], g[k % M], gp[k % M])
    p1 = s1 * N / g_sr
    p2 = s2 * N / g_rb
    # endpoint solutions sit on the cap up to bisection round-off
    over1, over2 = p1 > p_max, p2 > p_max
    p1 = np.where(over1, p_max, p1)
    p2 = np.where(over2, p_max, p2)
    s1 = np.where(over1, p_max * g_sr / N, s1)
    s2 = np.where(over2, p_max * g_rb / N, s2)
    en1 = p1 * data_D / (rate[k // M] * ch.bandwidth_B)
    en2 = p2 * data_D / (rate[k % M] * ch.bandwidth_B)
    energy = np.where(ok, en1 + en2, np.inf)
    return _RelayBatch(energy, k // M, k % M, e1, e2, p1, p2, s1, s2, en1, en2)


def relay_allocation(d_sr: float, d_rb: float, eps_e2e: float, data_D: float,
                     ch: ChannelParams, tbl: ModeTable, p_max: float) -> tuple[LinkPlan, LinkPlan]:
    """Minimum-energy modes, powers and PER split for a two-hop DF relay.

    Every ``(mode_sr, mode_rb)`` pair is tried; for each, golden-section
    search over the first hop's share ``eps1`` (the second gets
    ``1 - (1 - eps_e2e)/(1 - eps1)``) is restricted to splits both hops can
    meet under ``p_max``. Ties go to the lexicographically smallest mode pair.

    Raises
    ------
    InfeasibleError
        If no mode pair and split fits under the power cap. ``link`` names
        the hop with the larger full-power PER floor.
    """
    if not (d_sr > 0 and d_rb > 0):
        raise ValueError("hop distances must be > 0")
    if not 0 < eps_e2e < 1:
        raise ValueError("eps_e2e must lie in (0, 1)")
    if not (data_D > 0 and p_max > 0):
        raise ValueError("data_D and p_max must be > 0")
    r = _relay_batch([d_sr], [d_rb], eps_e2e, data_D, ch, tbl, p_max)
    if not np.isfinite(r.energy[0]):
        raise _relay_infeasible(d_sr, d_rb, eps_e2e, ch, tbl, p_max)
    return _plans(r, 0, eps_e2e)


def _plans(r: _RelayBatch, i: int, eps_e2e: float) -> tuple[LinkPlan, LinkPlan]:
    e1 = float(r.eps_sr[i])
    # exact complement keeps the recorded e2e budget at eps_e2e
    e2 = float(complementary_split(eps_e2e, e1))
    return (LinkPlan(int(r.mode_sr[i]), float(r.p_sr[i]), e1, float(r.e_sr[i]), float(r.snr_sr[i])),
            LinkPlan(int(r.mode_rb[i]), float(r.p_rb[i]), e2, float(r.e_rb[i]), float(r.snr_rb[i])))


def _relay_infeasible(d_sr, d_rb, eps_e2e, ch, tbl, p_max) -> InfeasibleError:
    rate, a, g, gp = tbl.arrays()
    N = noise_power(ch)
    floors = {}
    short = {}
    for name, d in (("sr", d_sr), ("rb", d_rb)):
        floors[name] = float(np.min(_per_rayleigh_arr(p_max * path_gain(d, ch) / N, a, g, gp)))
        need = _required_snr_arr(eps_e2e, a, g, gp) * N / path_gain(d, ch)
        short[name] = float(np.min(need) - p_max)
    link = "sr" if floors["sr"] >= floors["rb"] else "rb"
    hop = {"sr": "sensing->router", "rb": "router->base"}[link]
    return InfeasibleError(
        f"relay infeasible within {p_max:g} W: {hop} hop cannot reach the PER budget "
        f"(best full-power PER {floors[link]:.3g} vs e2e target {eps_e2e:g})",
        shortfall_w=max(short[link], 0.0), link=link)


@dataclass(frozen=True)
class CommMap:
    """Relay allocation evaluated at every grid cell for one sensing position."""

    grid: Grid
    sense_pos: tuple[float, float]
    base_pos: tuple[float, float]
    eps_e2e: float
    batch: _RelayBatch

    @property
    def energy(self) -> np.ndarray:
        return self.batch.energy

    def plans(self, cell: int) -> tuple[LinkPlan, LinkPlan]:
        return _plans(self.batch, cell, self.eps_e2e)


def comm_map(sense_pos, base_pos, grid: Grid, scenario: Scenario,
             mask: np.ndarray | None = None) -> CommMap:
    """Evaluate :func:`relay_allocation` on grid cells; infeasible cells get ``inf``.

    Only cells where ``mask`` is true are evaluated (the rest are ``inf``);
    see :func:`reach_mask` for the cells a trajectory can actually visit.
    """
    pts = grid.points()
    d_sr = np.linalg.norm(pts - np.asarray(sense_pos, dtype=float), axis=1)
    d_rb = np.linalg.norm(pts - np.asarray(base_pos, dtype=float), axis=1)
    use = ~((d_sr < _MIN_DIST) | (d_rb < _MIN_DIST))
    if mask is not None:
        use &= np.asarray(mask, dtype=bool)
    idx = np.flatnonzero(use)
    sub = _relay_batch(d_sr[idx], d_rb[idx], scenario.eps_target, scenario.data_D,
                       scenario.channel, scenario.modes, scenario.p_max)
    full = {}
    for name, arr in sub.__dict__.items():
        fill = np.inf if name == "energy" else (0 if arr.dtype.kind == "i" else np.nan)
        out = np.full(grid.size, fill, dtype=arr.dtype)
        out[idx] = arr
        full[name] = out
    return CommMap(grid, tuple(map(float, sense_pos)), tuple(map(float, base_pos)),
                   scenario.eps_target, _RelayBatch(**full))


def reach_mask(x0, n_steps: int, grid: Grid, scenario: Scenario) -> np.ndarray:
    """Cells within ``n_steps`` reachability balls of ``x0``."""
    dist = _move_dist(x0, grid)
    return dist <= n_steps * scenario.reach_radius * (1 + REACH_RTOL)


def stage_maps(x0, sense_traj: Sequence, base_pos, grid: Grid, scenario: Scenario) -> list[CommMap]:
    """Comm maps for every step, each restricted to cells reachable by then."""
    return [comm_map(s, base_pos, grid, scenario, reach_mask(x0, t + 1, grid, scenario))
            for t, s in enumerate(sense_traj)]


# ---------------------------------------------------------------------------
# step planners

def _move_dist(x_prev, grid: Grid) -> np.ndarray:
    return np.linalg.norm(grid.points() - np.asarray(x_prev, dtype=float), axis=1)


def _pick(cost: np.ndarray, dist: np.ndarray) -> int:
    """Index of min cost; ties -> smaller move distance -> lower flat index."""
    best = cost.min()
    tied = np.flatnonzero(cost == best)
    return int(tied[np.argmin(dist[tied])])


def _greedy_step(x_prev, sense_pos, base_pos, grid, scenario, cmap, with_motion) -> StepDecision:
    if cmap is None:
        cmap = comm_map(sense_pos, base_pos, grid, scenario, reach_mask(x_prev, 1, grid, scenario))
    dist = _move_dist(x_prev, grid)
    reach = dist <= scenario.reach_radius * (1 + REACH_RTOL)
    move_e = motion_energy(dist, scenario.motion)
    cost = cmap.energy + (move_e if with_motion else 0.0)
    cost = np.where(reach, cost, np.inf)
    if not np.isfinite(cost).any():
        raise InfeasibleError(
            f"no reachable grid cell within {scenario.reach_radius:g} m of "
            f"{tuple(x_prev)} meets the PER budget", link="relay")
    c = _pick(cost, dist)
    return _decision(c, grid, cmap, float(move_e[c]))


def _decision(cell: int, grid: Grid, cmap: CommMap, move_e: float) -> StepDecision:
    sr, rb = cmap.plans(cell)
    pos = tuple(float(v) for v in grid.points()[cell])
    return StepDecision(pos, sr, rb, move_e, sr.energy + rb.energy)


def comm_baseline_step(x_prev, sense_pos, base_pos, grid: Grid, scenario: Scenario,
                       cmap: CommMap | None = None) -> StepDecision:
    """Reachable cell with the least communication energy (motion is only booked)."""
    return _greedy_step(x_prev, sense_pos, base_pos, grid, scenario, cmap, with_motion=False)


def single_stage_step(x_prev, sense_pos, base_pos, grid: Grid, scenario: Scenario,
                      cmap: CommMap | None = None) -> StepDecision:
    """Reachable cell minimising this step's motion + communication energy."""
    return _greedy_step(x_prev, sense_pos, base_pos, grid, scenario, cmap, with_motion=True)


# ---------------------------------------------------------------------------
# multi-stage dynamic programme

def _relax(q: np.ndarray, grid: Grid, offsets, joules_per_m: float):
    """``V(x) = min_{y in ball(x)} [move(x,y) + q(y)]`` on the grid, with argmin.

    Offsets are visited in (distance, di, dj) order and only strictly better
    values replace the incumbent, which reproduces the greedy tie-break.
    """
    nx, ny = grid.shape
    Q = q.reshape(nx, ny)
    V = np.full((nx, ny), np.inf)
    arg = np.full((nx, ny), -1, dtype=np.int64)
    flat = np.arange(nx * ny).reshape(nx, ny)
    for di, dj, dist in offsets:
        if abs(di) >= nx or abs(dj) >= ny:
            # no cell pair this far apart; the slices below would wrap
            continue
        # x = (i, j) moves to y = (i+di, j+dj)
        xs_i = slice(max(0, -di), nx - max(0, di))
        xs_j = slice(max(0, -dj), ny - max(0, dj))
        ys_i = slice(max(0, di), nx - max(0, -di))
        ys_j = slice(max(0, dj), ny - max(0, -dj))
        cand = Q[ys_i, ys_j] + joules_per_m * dist
        cur = V[xs_i, xs_j]
        better = cand < cur
        cur[better] = cand[better]
        arg[xs_i, xs_j][better] = flat[ys_i, ys_j][better]
    return V.ravel(), arg.ravel()


def multi_stage_plan(x0, sense_traj: Sequence, base_pos, grid: Grid, scenario: Scenario,
                     cmaps: Sequence[CommMap] | None = None) -> tuple[list[StepDecision], ValueTable]:
    """Optimal router trajectory over the full horizon by backward induction.

    Stage costs are ``motion(x_t -> x_{t+1}) + comm_t(x_{t+1})``; the
    terminal value is zero. The first move starts from ``x0``, which need
    not be a grid cell.

    Raises
    ------
    InfeasibleError
        When some stage has no feasible cell reachable along any feasible
        trajectory; ``step`` names the first such stage.
    """
    T = len(sense_traj)
    if T < 1:
        raise ValueError("horizon must be >= 1")
    if cmaps is None:
        cmaps = stage_maps(x0, sense_traj, base_pos, grid, scenario)
    offsets = grid.offsets(scenario.reach_radius)
    jpm = scenario.motion.joules_per_metre
    n = grid.size

    values = [np.zeros(n) for _ in range(T + 1)]
    best_next = [np.full(n, -1, dtype=np.int64) for _ in range(T)]
    for t in range(T - 1, -1, -1):
        values[t], best_next[t] = _relax(cmaps[t].energy + values[t + 1], grid, offsets, jpm)

    dist0 = _move_dist(x0, grid)
    reach0 = dist0 <= scenario.reach_radius * (1 + REACH_RTOL)
    root_cost = np.where(reach0, motion_energy(dist0, scenario.motion)
                         + cmaps[0].energy + values[1], np.inf)
    if not np.isfinite(root_cost).any():
        step = _first_dead_stage(x0, cmaps, grid, scenario, offsets)
        raise InfeasibleError(f"step {step}: no feasible router position on any trajectory "
                              f"from {tuple(x0)}", link="relay", step=step)
    c = _pick(root_cost, dist0)
    table = ValueTable(grid, values, best_next, float(root_cost[c]), c)

    pts = grid.points()
    decisions = [_decision(c, grid, cmaps[0], float(motion_energy(dist0[c], scenario.motion)))]
    for t in range(1, T):
        nxt = int(best_next[t][c])
        d = float(np.linalg.norm(pts[nxt] - pts[c]))
        decisions.append(_decision(nxt, grid, cmaps[t], float(motion_energy(d, scenario.motion))))
        c = nxt
    return decisions, table


def _first_dead_stage(x0, cmaps, grid, scenario, offsets) -> int:
    """First step whose forward-reachable feasible set is empty."""
    dist0 = _move_dist(x0, grid)
    alive = (dist0 <= scenario.reach_radius * (1 + REACH_RTOL)) & np.isfinite(cmaps[0].energy)
    if not alive.any():
        return 0
    for t in range(1, len(cmaps)):
        q = np.where(alive, 0.0, np.inf)
        # reachable-from-alive == alive reachable-to, the ball is symmetric
        v, _ = _relax(q, grid, offsets, 0.0)
        alive = np.isfinite(v) & np.isfinite(cmaps[t].energy)
        if not alive.any():
            return t
    return len(cmaps) - 1
