"""Scenario description and its YAML config format.

A scenario file is a YAML mapping whose top-level keys are exactly the
:class:`Scenario` fields::

    base_pos: [0, 0]                 # m
    sense_traj: [[100, 40], [120, 40], [130, 30]]
    router_start: [50, 20]
    dt: 50.0                         # s per planning step
    data_D: 1.0e+9                   # bits delivered per step
    eps_target: 0.01                 # end-to-end averaged PER bound
    p_max: 4.0                       # W, per robot
    horizon: 3                       # must equal len(sense_traj)
    channel: {ref_gain_K0: 0.01, ref_dist_d0: 20, pathloss_exp_beta: 3.68,
              noise_psd_N0: -100,    # dBm/Hz
              bandwidth_B: 2.0e+7}
    modes: default                   # or path to a mode-table CSV
    motion: {k1: 7.4, k2: 0.29, v_max: 1.0}
    grid: {x_min: 0, x_max: 140, y_min: 0, y_max: 80, spacing: 5}

``channel``, ``modes`` and ``motion`` may be omitted to take the defaults.
Unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .channel import ChannelParams, ModeTable, dbm_per_hz_to_w, default_mode_table, load_mode_table
from .errors import ConfigError
from .motion import REACH_RTOL, MotionParams

Point = tuple[float, float]


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid of candidate router positions.

    Cells are numbered row-major in x: ``flat = ix * ny + iy``.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    spacing: float

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("grid spacing must be > 0")
        if not (self.x_max >= self.x_min and self.y_max >= self.y_min):
            raise ValueError("grid bounds are inverted")

    @property
    def nx(self) -> int:
        return int(math.floor((self.x_max - self.x_min) / self.spacing + 1e-9)) + 1

    @property
    def ny(self) -> int:
        return int(math.floor((self.y_max - self.y_min) / self.spacing + 1e-9)) + 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.nx, self.ny

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def xs(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.nx)

    def ys(self) -> np.ndarray:
        return self.y_min + self.spacing * np.arange(self.ny)

    def points(self) -> np.ndarray:
        """``(size, 2)`` array of cell coordinates in flat order."""
        X, Y = np.meshgrid(self.xs(), self.ys(), indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def contains(self, p) -> bool:
        x, y = p
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def offsets(self, radius: float) -> list[tuple[int, int, float]]:
        """Integer cell offsets within ``radius`` metres, sorted by (distance, di, dj)."""
        k = int(math.floor(radius / self.spacing + 1e-9))
        out = []
        for di in range(-k, k + 1):
            for dj in range(-k, k + 1):
                dist = self.spacing * math.hypot(di, dj)
                if dist <= radius * (1 + REACH_RTOL):
                    out.append((di, dj, dist))
        out.sort(key=lambda o: (o[2], o[0], o[1]))
        return out


@dataclass(frozen=True)
class Scenario:
    base_pos: Point
    sense_traj: tuple[Point, ...]
    router_start: Point
    dt: float
    data_D: float
    eps_target: float
    p_max: float
    grid: Grid
    channel: ChannelParams = field(default_factory=ChannelParams)
    modes: ModeTable = field(default_factory=default_mode_table)
    motion: MotionParams = field(default_factory=MotionParams)
    horizon: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "sense_traj", tuple(tuple(map(float, p)) for p in self.sense_traj))
        object.__setattr__(self, "base_pos", tuple(map(float, self.base_pos)))
        object.__setattr__(self, "router_start", tuple(map(float, self.router_start)))
        if self.horizon is None:
            object.__setattr__(self, "horizon", len(self.sense_traj))
        if len(self.sense_traj) < 1:
            raise ValueError("sense_traj must contain at least one position")
        if self.horizon != len(self.sense_traj):
            raise ValueError(f"horizon={self.horizon} but sense_traj has {len(self.sense_traj)} steps")
        if not 0 < self.eps_target < 1:
            raise ValueError("eps_target must lie in (0, 1)")
        for name in ("p_max", "dt", "data_D"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not self.grid.contains(self.router_start):
            raise ValueError("router_start lies outside the grid bounds")

    @property
    def reach_radius(self) -> float:
        return self.motion.v_max * self.dt

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form used for hashing and provenance."""
        ch = self.channel
        return {
            "base_pos": list(self.base_pos),
            "sense_traj": [list(p) for p in self.sense_traj],
            "router_start": list(self.router_start),
            "dt": self.dt, "data_D": self.data_D, "eps_target": self.eps_target,
            "p_max": self.p_max, "horizon": self.horizon,
            "channel": {"ref_gain_K0": ch.ref_gain_K0, "ref_dist_d0": ch.ref_dist_d0,
                        "pathloss_exp_beta": ch.pathloss_exp_beta,
                        "noise_psd_N0": ch.noise_psd_N0, "bandwidth_B": ch.bandwidth_B},
            "modes": [[m.label, m.rate_Rn, m.coef_a, m.coef_g, m.thresh_gamma_p] for m in self.modes],
            "motion": {"k1": self.motion.k1, "k2": self.motion.k2, "v_max": self.motion.v_max},
            "grid": {"x_min": self.grid.x_min, "x_max": self.grid.x_max, "y_min": self.grid.y_min,
                     "y_max": self.grid.y_max, "spacing": self.grid.spacing},
        }

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


# ---------------------------------------------------------------------------
# loading

_TOP_KEYS = {"base_pos", "sense_traj", "router_start", "dt", "data_D", "eps_target",
             "p_max", "horizon", "channel", "modes", "motion", "grid"}
_REQUIRED = {"base_pos", "sense_traj", "router_start", "dt", "data_D", "eps_target",
             "p_max", "grid"}
_SUB_KEYS = {
    "channel": {"ref_gain_K0", "ref_dist_d0", "pathloss_exp_beta", "noise_psd_N0", "bandwidth_B"},
    "motion": {"k1", "k2", "v_max"},
    "grid": {"x_min", "x_max", "y_min", "y_max", "spacing"},
}


def _key_lines(text: str) -> dict[str, int]:
    """Map dotted key paths to 1-based line numbers in the YAML source."""
    lines: dict[str, int] = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines
    if not isinstance(root, yaml.MappingNode):
        return lines
    for k, v in root.value:
        lines[k.value] = k.start_mark.line + 1
        if isinstance(v, yaml.MappingNode):
            for kk, _ in v.value:
                lines[f"{k.value}.{kk.value}"] = kk.start_mark.line + 1
    return lines


class _Reader:
    def __init__(self, lines: dict[str, int]):
        self.lines = lines

    def err(self, msg: str, key: str) -> ConfigError:
        line = self.lines.get(key, self.lines.get(key.split(".")[0]))
        return ConfigError(msg, field=key, line=line)

    def num(self, value: Any, key: str, integer: bool = False) -> float:
        # PyYAML reads "1e8" (no dot) as a string, so accept numeric strings
        if isinstance(value, bool):
            raise self.err("expected a number, got a boolean", key)
        try:
            out = float(value)
        except (TypeError, ValueError):
            raise self.err(f"expected a number, got {value!r}", key) from None
        if not math.isfinite(out):
            raise self.err("value must be finite", key)
        if integer:
            if out != int(out):
                raise self.err("expected an integer", key)
            return int(out)
        return out

    def point(self, value: Any, key: str) -> tuple[float, float]:
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise self.err("expected a coordinate pair [x, y]", key)
        return (self.num(value[0], key), self.num(value[1], key))

    def section(self, raw: dict, name: str) -> dict[str, float]:
        sec = raw[name]
        if not isinstance(sec, dict):
            raise self.err("expected a mapping", name)
        unknown = set(sec) - _SUB_KEYS[name]
        if unknown:
            raise self.err(f"unknown key(s): {', '.join(sorted(map(str, unknown)))}", name)
        return {k: self.num(v, f"{name}.{k}") for k, v in sec.items()}


def load_scenario(source: str | Path, base_dir: str | Path | None = None) -> Scenario:
    """Parse and validate a scenario from YAML text or a file path.

    Raises
    ------
    ConfigError
        On syntax errors, missing or unknown keys, and invariant violations;
        the message names the offending field and line where known.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).is_file()):
        path = Path(source)
        text = path.read_text()
        base_dir = base_dir or path.parent
    else:
        text = str(source)
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None) from None
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a YAML mapping")
    r = _Reader(_key_lines(text))
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        k = sorted(map(str, unknown))[0]
        raise r.err(f"unknown key(s): {', '.join(sorted(map(str, unknown)))}", k)
    missing = _REQUIRED - set(raw)
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(sorted(missing))}",
                          field=sorted(missing)[0])

    traj = raw["sense_traj"]
    if not isinstance(traj, list) or not traj:
        raise r.err("expected a non-empty list of coordinate pairs", "sense_traj")
    sense = tuple(r.point(p, "sense_traj") for p in traj)

    g = r.section(raw, "grid")
    if set(g) != _SUB_KEYS["grid"]:
        raise r.err(f"grid needs all of {', '.join(sorted(_SUB_KEYS['grid']))}", "grid")
    try:
        grid = Grid(**g)
    except ValueError as exc:
        raise r.err(str(exc), "grid") from None

    channel = ChannelParams()
    if "channel" in raw:
        c = r.section(raw, "channel")
        if "noise_psd_N0" in c:
            c["noise_psd_N0"] = dbm_per_hz_to_w(c["noise_psd_N0"])
        try:
            channel = ChannelParams(**c)
        except ValueError as exc:
            raise r.err(str(exc), "channel") from None

    motion = MotionParams()
    if "motion" in raw:
        try:
            motion = MotionParams(**r.section(raw, "motion"))
        except ValueError as exc:
            raise r.err(str(exc), "motion") from None

    modes = default_mode_table()
    if raw.get("modes", "default") != "default":
        mpath = raw["modes"]
        if not isinstance(mpath, str):
            raise r.err("modes must be 'default' or a path to a mode-table CSV", "modes")
        p = Path(mpath)
        if not p.is_absolute() and base_dir is not None:
            p = Path(base_dir) / p
        if not p.is_file():
            raise r.err(f"mode table file not found: {p}", "modes")
        modes = load_mode_table(p)

    values = {
        "base_pos": r.point(raw["base_pos"], "base_pos"),
        "router_start": r.point(raw["router_start"], "router_start"),
        "dt": r.num(raw["dt"], "dt"),
        "data_D": r.num(raw["data_D"], "data_D"),
        "eps_target": r.num(raw["eps_target"], "eps_target"),
        "p_max": r.num(raw["p_max"], "p_max"),
    }
    horizon = r.num(raw["horizon"], "horizon", integer=True) if "horizon" in raw else len(sense)
    if not 0 < values["eps_target"] < 1:
        raise r.err("eps_target must lie in (0, 1)", "eps_target")
    for k in ("dt", "data_D", "p_max"):
        if not values[k] > 0:
            raise r.err(f"{k} must be > 0", k)
    if horizon != len(sense):
        raise r.err(f"horizon={horizon} but sense_traj has {len(sense)} steps", "horizon")
    if not grid.contains(values["router_start"]):
        raise r.err("router_start lies outside the grid bounds", "router_start")
    return Scenario(sense_traj=sense, grid=grid, channel=channel, modes=modes,
                    motion=motion, horizon=horizon, **values)


def default_scenario_path() -> Path:
    return Path(str(resources.files("jcmp.data").joinpath("default_scenario.yaml")))


def default_scenario() -> Scenario:
    return load_scenario(default_scenario_path())
