"""Radio link model: pathloss, SNR, adaptive modulation and coding, PER.

The PER of one transmit mode follows the exponential approximation used for
convolutionally coded AMC schemes::

    PER(gamma) = 1                      gamma <  gamma_p
               = a * exp(-g * gamma)    gamma >= gamma_p

and under quasi-static Rayleigh fading (SNR exponentially distributed with
mean ``gamma_bar``) the average has the closed form implemented in
:func:`per_rayleigh`.

Planning works with the fading-averaged PER only; the instantaneous model
is used by the Monte-Carlo validator.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import ConfigError, InfeasibleError

__all__ = [
    "ChannelParams", "TxMode", "ModeTable", "LinkPlan",
    "dbm_per_hz_to_w", "path_gain", "noise_power", "mean_snr",
    "per_instant", "per_rayleigh", "required_mean_snr", "min_link_energy",
    "load_mode_table", "default_mode_table",
]

CONTINUITY_TOL = 1e-6
# file gamma_p may disagree with ln(a)/g only by rounding of the published table
_GAMMA_P_FILE_TOL_DB = 0.1
_FEAS_RTOL = 1e-9


def dbm_per_hz_to_w(value_dbm_hz: float) -> float:
    """Convert a power spectral density from dBm/Hz to W/Hz."""
    return 10.0 ** ((value_dbm_hz - 30.0) / 10.0)


@dataclass(frozen=True)
class ChannelParams:
    """Large-scale propagation and receiver noise parameters.

    ``ref_gain_K0`` is the linear power gain at ``ref_dist_d0`` metres and
    ``noise_psd_N0`` is in W/Hz (see :func:`dbm_per_hz_to_w`).
    """

    ref_gain_K0: float = 1e-2
    ref_dist_d0: float = 20.0
    pathloss_exp_beta: float = 3.68
    noise_psd_N0: float = dbm_per_hz_to_w(-100.0)
    bandwidth_B: float = 20e6

    def __post_init__(self):
        for name in ("ref_gain_K0", "ref_dist_d0", "pathloss_exp_beta",
                     "noise_psd_N0", "bandwidth_B"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"ChannelParams.{name} must be finite and > 0, got {v!r}")
        if self.pathloss_exp_beta < 2:
            raise ValueError("ChannelParams.pathloss_exp_beta must be >= 2")


@dataclass(frozen=True)
class TxMode:
    """One adaptive modulation and coding mode.

    Attributes
    ----------
    label : str
        Human-readable name, e.g. ``"QPSK-1/2"``.
    rate_Rn : float
        Information bits per symbol.
    coef_a, coef_g : float
        Coefficients of the exponential PER fit.
    thresh_gamma_p : float
        Linear SNR below which the PER is taken as 1.
    """

    label: str
    rate_Rn: float
    coef_a: float
    coef_g: float
    thresh_gamma_p: float

    def __post_init__(self):
        if not self.rate_Rn > 0:
            raise ValueError(f"mode {self.label}: rate_Rn must be > 0")
        if not self.coef_a >= 1:
            raise ValueError(f"mode {self.label}: coef_a must be >= 1")
        if not self.coef_g > 0:
            raise ValueError(f"mode {self.label}: coef_g must be > 0")
        if not self.thresh_gamma_p >= 0:
            raise ValueError(f"mode {self.label}: thresh_gamma_p must be >= 0")
        jump = self.coef_a * math.exp(-self.coef_g * self.thresh_gamma_p) - 1.0
        if abs(jump) > CONTINUITY_TOL:
            raise ValueError(
                f"mode {self.label}: PER model discontinuous at gamma_p "
                f"(a*exp(-g*gamma_p) - 1 = {jump:.3e})")

    @classmethod
    def continuous(cls, label: str, rate_Rn: float, coef_a: float, coef_g: float) -> "TxMode":
        """Build a mode with ``thresh_gamma_p = ln(a)/g``."""
        return cls(label, rate_Rn, coef_a, coef_g, math.log(coef_a) / coef_g)


@dataclass(frozen=True)
class ModeTable:
    """Ordered AMC ladder, strictly increasing in rate."""

    modes: tuple[TxMode, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("ModeTable must not be empty")
        rates = [m.rate_Rn for m in self.modes]
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ValueError("ModeTable rates must be strictly increasing")

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self) -> Iterator[TxMode]:
        return iter(self.modes)

    def __getitem__(self, i: int) -> TxMode:
        return self.modes[i]

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(rate, a, g, gamma_p)`` as float arrays."""
        return (np.array([m.rate_Rn for m in self.modes]),
                np.array([m.coef_a for m in self.modes]),
                np.array([m.coef_g for m in self.modes]),
                np.array([m.thresh_gamma_p for m in self.modes]))


@dataclass(frozen=True)
class LinkPlan:
    """Transmit decision for one hop."""

    mode_index: int
    tx_power: float
    per_budget: float
    energy: float
    mean_snr: float = float("nan")


# ---------------------------------------------------------------------------
# mode table I/O

_MODE_FIELDS = ("label", "rate", "a", "g", "gamma_p_dB")


def load_mode_table(source: str | Path | io.TextIOBase) -> ModeTable:
    """Read a mode table from CSV text.

    The file has a header row with columns ``label, rate, a, g, gamma_p_dB``
    (``#`` starts a comment line). The stored threshold is converted from
    dB and then renormalised to ``ln(a)/g`` so that every mode's PER curve is
    continuous; a stored value further than 0.1 dB from ``ln(a)/g`` is
    rejected as a typo.
    """
    if isinstance(source, (str, Path)) and Path(source).exists():
        text = Path(source).read_text()
    elif isinstance(source, io.TextIOBase):
        text = source.read()
    else:
        text = str(source)
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), start=1)
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ConfigError("mode table is empty")
    reader = csv.reader([ln for _, ln in lines], skipinitialspace=True)
    header = [h.strip() for h in next(reader)]
    if tuple(header) != _MODE_FIELDS:
        raise ConfigError(f"mode table header must be {','.join(_MODE_FIELDS)}, got {header}",
                          line=lines[0][0])
    modes = []
    for (lineno, _), row in zip(lines[1:], reader):
        if len(row) != len(_MODE_FIELDS):
            raise ConfigError(f"expected {len(_MODE_FIELDS)} columns, got {len(row)}", line=lineno)
        label = row[0].strip()
        try:
            rate, a, g, gp_db = (float(x) for x in row[1:])
        except ValueError as exc:
            raise ConfigError(f"non-numeric value: {exc}", line=lineno) from None
        if not (a >= 1 and g > 0):
            raise ConfigError("need a >= 1 and g > 0", field=label, line=lineno)
        gp = math.log(a) / g
        gp_file_db = 10 * math.log10(gp) if gp > 0 else -math.inf
        if abs(gp_file_db - gp_db) > _GAMMA_P_FILE_TOL_DB:
            raise ConfigError(
                f"gamma_p_dB={gp_db} inconsistent with ln(a)/g = {gp_file_db:.4f} dB",
                field=label, line=lineno)
        try:
            modes.append(TxMode(label, rate, a, g, gp))
        except ValueError as exc:
            raise ConfigError(str(exc), field=label, line=lineno) from None
    try:
        return ModeTable(tuple(modes))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def default_mode_table() -> ModeTable:
    """The shipped six-mode table (BPSK-1/2 ... 64QAM-3/4, 1080-bit packets)."""
    text = resources.files("jcmp.data").joinpath("modes_default.csv").read_text()
    return load_mode_table(text)


# ---------------------------------------------------------------------------
# propagation

def path_gain(d, ch: ChannelParams):
    """Linear power gain ``K0 * (d/d0)**(-beta)`` at distance ``d`` metres."""
    d = np.asarray(d, dtype=float)
    if np.any(~(d > 0)):
        raise ValueError("distance must be > 0")
    out = ch.ref_gain_K0 * (d / ch.ref_dist_d0) ** (-ch.pathloss_exp_beta)
    return float(out) if out.ndim == 0 else out


def noise_power(ch: ChannelParams) -> float:
    """Receiver noise power ``N0 * B`` in watts."""
    return ch.noise_psd_N0 * ch.bandwidth_B


def mean_snr(p_tx, d, ch: ChannelParams):
    """Fading-averaged received SNR for transmit power ``p_tx`` (W) at ``d`` m."""
    p_tx = np.asarray(p_tx, dtype=float)
    if np.any(p_tx < 0):
        raise ValueError("transmit power must be >= 0")
    out = p_tx * np.asarray(path_gain(d, ch)) / noise_power(ch)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# packet error rate

def per_instant(gamma, m: TxMode):
    """PER at instantaneous linear SNR ``gamma``."""
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0):
        raise ValueError("SNR must be >= 0")
    out = np.where(gamma < m.thresh_gamma_p, 1.0,
                   np.minimum(1.0, m.coef_a * np.exp(-m.coef_g * gamma)))
    return float(out) if out.ndim == 0 else out


def _per_rayleigh_arr(gb, a, g, gp):
    # -expm1 keeps 1 - exp(-x) accurate when gamma_p/gamma_bar is small
    x = gp / gb
    return -np.expm1(-x) + a / (1.0 + g * gb) * np.exp(-x * (1.0 + g * gb))


def per_rayleigh(gamma_bar, m: TxMode):
    """Average PER over Rayleigh fading with mean SNR ``gamma_bar`` (linear)."""
    gb = np.asarray(gamma_bar, dtype=float)
    if np.any(~(gb > 0)):
        raise ValueError("mean SNR must be > 0")
    out = _per_rayleigh_arr(gb, m.coef_a, m.coef_g, m.thresh_gamma_p)
    return float(out) if out.ndim == 0 else out


_LOG_LO, _LOG_HI = math.log(1e-12), math.log(1e18)


def _required_snr_arr(eps, a, g, gp, rtol=1e-10):
    """Vectorised bisection in log(gamma_bar); all array args broadcast.

    Returns the upper end of the bracket, so the averaged PER at the result
    never exceeds ``eps``. Each element stops independently once it meets
    the tolerance, so results do not depend on what else is in the batch.
    """
    eps, a, g, gp = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (eps, a, g, gp)))
    # PER_bar(gb) <= (gp + a*exp(-g*gp)/g) / gb, so this is an upper bound on the root
    upper = np.log((gp + a * np.exp(-g * gp) / g) / eps)
    hi = np.minimum(upper, _LOG_HI)
    lo = hi - math.log(16.0)
    per_lo = _per_rayleigh_arr(np.exp(lo), a, g, gp)
    lo = np.where(per_lo > eps, lo, _LOG_LO)
    per_hi = _per_rayleigh_arr(np.exp(hi), a, g, gp)
    if np.any(_per_rayleigh_arr(np.exp(lo), a, g, gp) < eps) or np.any(per_hi > eps):
        raise ValueError("target PER outside the representable SNR range")
    for _ in range(200):
        active = np.abs(per_hi - eps) > rtol * eps
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        p = _per_rayleigh_arr(np.exp(mid), a, g, gp)
        above = p > eps
        lo = np.where(active & above, mid, lo)
        move_hi = active & ~above
        hi = np.where(move_hi, mid, hi)
        per_hi = np.where(move_hi, p, per_hi)
    return np.exp(hi)


def required_mean_snr(eps, m: TxMode):
    """Mean SNR at which the Rayleigh-averaged PER of ``m`` equals ``eps``.

    Found by bisection on ``log(gamma_bar)``; the result satisfies
    ``|per_rayleigh(result, m) - eps| <= 1e-10 * eps``.
    """
    e = np.asarray(eps, dtype=float)
    if np.any(~((e > 0) & (e < 1))):
        raise ValueError("target PER must lie in (0, 1)")
    out = _required_snr_arr(e, m.coef_a, m.coef_g, m.thresh_gamma_p)
    return float(out) if out.ndim == 0 else out


def min_link_energy(d: float, eps: float, data_D: float, ch: ChannelParams,
                    tbl: ModeTable, p_max: float) -> LinkPlan:
    """Cheapest mode/power meeting an averaged PER budget on a single hop.

    Each mode needs power ``required_mean_snr(eps) * N / gain(d)`` and spends
    ``data_D / (rate * B)`` seconds on air. Modes above ``p_max`` are dropped;
    ties go to the lower mode index.

    Raises
    ------
    InfeasibleError
        If no mode fits under ``p_max``; ``shortfall_w`` is the smallest
        power excess over the cap.
    """
    if not d > 0:
        raise ValueError("distance must be > 0")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if not (data_D > 0 and p_max > 0):
        raise ValueError("data_D and p_max must be > 0")
    rate, a, g, gp = tbl.arrays()
    snr = _required_snr_arr(eps, a, g, gp)
    gain = path_gain(d, ch)
    power = snr * noise_power(ch) / gain
    energy = power * data_D / (rate * ch.bandwidth_B)
    feasible = power <= p_max * (1 + _FEAS_RTOL)
    if not feasible.any():
        shortfall = float(power.min() - p_max)
        raise InfeasibleError(
            f"no mode reaches PER {eps:g} at {d:.3f} m within {p_max:g} W "
            f"(short by {shortfall:.4g} W)", shortfall_w=shortfall, link="direct")
    energy = np.where(feasible, energy, np.inf)
    k = int(np.argmin(energy))  # argmin returns the first minimum -> lowest index
    p, snr_k = float(power[k]), float(snr[k])
    if p > p_max:
        p, snr_k = p_max, p_max * gain / noise_power(ch)
    return LinkPlan(k, p, float(eps), p * data_D / (float(rate[k]) * ch.bandwidth_B), snr_k)
