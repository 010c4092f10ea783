"""Scenario engine: observe -> orient -> decide -> act, per planning step.

* observe: read the sensing/base positions and the router's committed position;
* orient: assess link quality over the candidate grid (relay allocation at
  every reachable cell, i.e. the communication-energy map);
* decide: hand the assessment to the selected planner;
* act: commit the router position and book motion and transmit energy.

The multi-stage planner decides once for the whole horizon, after orienting
on every step. Finished runs can be appended to a JSON-lines run log.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

import numpy as np

from .channel import mean_snr, per_instant, per_rayleigh
from .cqm import e2e_per
from .errors import ConfigError, InfeasibleError
from .motion import reachable
from .planner import (CommMap, StepDecision, comm_baseline_step, multi_stage_plan,
                      single_stage_step, stage_maps)
from .scenario import Scenario, load_scenario

PlannerKind = Literal["baseline", "single", "multi"]
PLANNERS: tuple[str, ...] = ("baseline", "single", "multi")

# slack for re-checking planner output against the constraints
_CHECK_RTOL = 1e-9


class ConstraintViolation(RuntimeError):
    """A committed decision breaks the PER, power or reachability constraint."""


@dataclass
class TrajectoryReport:
    planner_kind: str
    steps: list[StepDecision]
    step_e2e_per: list[float]
    scenario_digest: str
    savings_vs_baseline: float | None = None

    @property
    def motion_J(self) -> float:
        return math.fsum(s.motion_energy for s in self.steps)

    @property
    def comm_J(self) -> float:
        return math.fsum(s.comm_energy for s in self.steps)

    @property
    def total_J(self) -> float:
        return math.fsum(s.motion_energy + s.comm_energy for s in self.steps)

    def attach_baseline(self, baseline: "TrajectoryReport") -> None:
        self.savings_vs_baseline = 1.0 - self.total_J / baseline.total_J


@dataclass
class Comparison:
    reports: dict[str, TrajectoryReport]

    def savings(self, kind: str) -> float:
        return self.reports[kind].savings_vs_baseline

    def rows(self) -> list[dict]:
        return [{"planner": k, "motion_J": r.motion_J, "comm_J": r.comm_J,
                 "total_J": r.total_J, "savings_pct": 100.0 * r.savings_vs_baseline}
                for k, r in self.reports.items()]


@dataclass(frozen=True)
class Observation:
    step: int
    sense_pos: tuple[float, float]
    base_pos: tuple[float, float]
    router_pos: tuple[float, float]


class Engine:
    """One scenario, any number of planner runs sharing the link assessments."""

    def __init__(self, scenario: Scenario):
        self.s = scenario
        self._maps: list[CommMap] | None = None
        self.router_pos = scenario.router_start
        self.log: list[StepDecision] = []

    # -- OODA stages -------------------------------------------------------
    def observe(self, t: int) -> Observation:
        return Observation(t, self.s.sense_traj[t], self.s.base_pos, self.router_pos)

    def orient(self, t: int) -> CommMap:
        if self._maps is None:
            s = self.s
            # every planner starts at router_start, so the reach balls around it
            # cover all cells any of them can visit
            self._maps = stage_maps(s.router_start, s.sense_traj, s.base_pos, s.grid, s)
        return self._maps[t]

    def decide(self, kind: str, obs: Observation, cmap: CommMap) -> StepDecision:
        step = {"baseline": comm_baseline_step, "single": single_stage_step}[kind]
        return step(obs.router_pos, obs.sense_pos, obs.base_pos, self.s.grid, self.s, cmap)

    def act(self, decision: StepDecision) -> None:
        self.router_pos = decision.router_pos
        self.log.append(decision)

    # -- loop --------------------------------------------------------------
    def run(self, kind: str) -> TrajectoryReport:
        if kind not in PLANNERS:
            raise ValueError(f"unknown planner {kind!r}; choose from {', '.join(PLANNERS)}")
        s = self.s
        self.router_pos = s.router_start
        self.log = []
        if kind == "multi":
            maps = [self.orient(t) for t in range(s.horizon)]
            plan, _ = multi_stage_plan(s.router_start, s.sense_traj, s.base_pos, s.grid, s, maps)
            for t, decision in enumerate(plan):
                self.observe(t)
                self.act(decision)
        else:
            for t in range(s.horizon):
                obs = self.observe(t)
                cmap = self.orient(t)
                try:
                    decision = self.decide(kind, obs, cmap)
                except InfeasibleError as exc:
                    raise exc.at_step(t) from None
                self.act(decision)
        pers = check_constraints(s, self.log)
        return TrajectoryReport(kind, list(self.log), pers, s.digest())


def check_constraints(s: Scenario, steps: list[StepDecision]) -> list[float]:
    """Re-derive each step's end-to-end averaged PER from geometry and check it.

    Returns the per-step e2e PER values. Raises :class:`ConstraintViolation`
    if a step exceeds the PER target or the power cap, or jumps further than
    the robot can drive in one step.
    """
    out = []
    prev = s.router_start
    for t, (d, sense) in enumerate(zip(steps, s.sense_traj)):
        if not reachable(prev, d.router_pos, s.dt, s.motion):
            raise ConstraintViolation(f"step {t}: router jump {prev} -> {d.router_pos} "
                                      f"exceeds {s.reach_radius:g} m")
        pers = []
        for link, a, b in ((d.link_sr, sense, d.router_pos), (d.link_rb, d.router_pos, s.base_pos)):
            if link.tx_power > s.p_max:
                raise ConstraintViolation(f"step {t}: tx power {link.tx_power} W over cap")
            snr = mean_snr(link.tx_power, math.dist(a, b), s.channel)
            pers.append(per_rayleigh(snr, s.modes[link.mode_index]))
        p = e2e_per(*pers)
        if p > s.eps_target * (1 + _CHECK_RTOL):
            raise ConstraintViolation(f"step {t}: e2e PER {p:.6g} above target {s.eps_target:g}")
        out.append(p)
        prev = d.router_pos
    return out


def run(s: Scenario, kind: str) -> TrajectoryReport:
    """Run one planner over the scenario horizon."""
    return Engine(s).run(kind)


def compare(s: Scenario) -> Comparison:
    """Run all three planners on shared link assessments and attach savings."""
    eng = Engine(s)
    reports = {k: eng.run(k) for k in PLANNERS}
    for r in reports.values():
        r.attach_baseline(reports["baseline"])
    return Comparison(reports)


# ---------------------------------------------------------------------------
# Monte-Carlo check of the planned averaged PERs

@dataclass(frozen=True)
class LinkCheck:
    step: int
    link: str
    budget: float
    planned_per: float
    empirical_per: float
    std_err: float
    flagged: bool


@dataclass(frozen=True)
class ValidationRecord:
    planner_kind: str
    n_samples: int
    seed: int
    links: tuple[LinkCheck, ...]

    @property
    def any_flagged(self) -> bool:
        return any(c.flagged for c in self.links)


def monte_carlo_validate(s: Scenario, report: TrajectoryReport, n_samples: int = 100_000,
                         seed: int = 0) -> ValidationRecord:
    """Sample Rayleigh fading at each planned mean SNR and compare PERs.

    A link is flagged when its empirical PER exceeds its budget by more than
    three standard errors. Deterministic for a given ``seed``.
    """
    if isinstance(n_samples, bool) or int(n_samples) != n_samples or n_samples < 10_000:
        raise ValueError("n_samples must be an integer >= 10000")
    n_samples = int(n_samples)
    rng = np.random.default_rng(seed)
    checks = []
    for t, (d, sense) in enumerate(zip(report.steps, s.sense_traj)):
        for name, link, a, b in (("sr", d.link_sr, sense, d.router_pos),
                                 ("rb", d.link_rb, d.router_pos, s.base_pos)):
            mode = s.modes[link.mode_index]
            gbar = mean_snr(link.tx_power, math.dist(a, b), s.channel)
            planned = per_rayleigh(gbar, mode)
            emp = float(np.mean(per_instant(rng.exponential(gbar, n_samples), mode)))
            se = math.sqrt(planned * (1 - planned) / n_samples)
            checks.append(LinkCheck(t, name, link.per_budget, planned, emp, se,
                                    emp > link.per_budget + 3 * se))
    return ValidationRecord(report.planner_kind, n_samples, int(seed), tuple(checks))


# ---------------------------------------------------------------------------
# run log

def persist_run(report: TrajectoryReport, path: str | Path) -> None:
    """Append one JSON record for ``report`` to the run log at ``path``."""
    rec = {
        "scenario_hash": report.scenario_digest,
        "planner": report.planner_kind,
        "motion_J": report.motion_J,
        "comm_J": report.comm_J,
        "total_J": report.total_J,
        "savings_vs_baseline": report.savings_vs_baseline,
        "router_path": [list(d.router_pos) for d in report.steps],
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_runs(path: str | Path) -> list[dict]:
    """Read every record of a run log; a corrupt line raises :class:`ConfigError`."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"corrupt run-log record: {exc.msg}", line=lineno) from None
            if not isinstance(rec, dict) or "total_J" not in rec:
                raise ConfigError("run-log record lacks required fields", line=lineno)
            out.append(rec)
    return out


__all__ = ["Engine", "Observation", "TrajectoryReport", "Comparison", "ValidationRecord",
           "LinkCheck", "ConstraintViolation", "PLANNERS", "load_scenario", "run", "compare",
           "check_constraints", "monte_carlo_validate", "persist_run", "read_runs"]
