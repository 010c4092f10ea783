import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from jcmp.channel import (ChannelParams, ModeTable, TxMode, dbm_per_hz_to_w, default_mode_table,
                          load_mode_table, mean_snr, min_link_energy, noise_power, path_gain,
                          per_instant, per_rayleigh, required_mean_snr)
from jcmp.errors import ConfigError, InfeasibleError


def ch_(**kw):
    base = dict(ref_gain_K0=1.0, ref_dist_d0=1.0, pathloss_exp_beta=3.68,
                noise_psd_N0=1.0, bandwidth_B=1.0)
    base.update(kw)
    return ChannelParams(**base)


# -- path gain / noise / SNR ------------------------------------------------

def test_path_gain_examples():
    assert path_gain(1.0, ch_()) == 1.0
    assert path_gain(10.0, ch_(pathloss_exp_beta=2.0)) == pytest.approx(0.01, rel=1e-15)
    g = path_gain(100.0, ch_(ref_gain_K0=1e-4))
    log_domain = 10 ** (math.log10(1e-4) - 3.68 * math.log10(100.0))
    assert g == pytest.approx(log_domain, rel=1e-12)
    assert g == pytest.approx(4.365e-12, rel=1e-3)


@pytest.mark.parametrize("d", [0.0, -1.0])
def test_path_gain_domain(d):
    with pytest.raises(ValueError):
        path_gain(d, ch_())


def test_path_gain_decreasing_and_scaling():
    ch = ch_(ref_gain_K0=3e-3, ref_dist_d0=7.0)
    d = np.linspace(1, 300, 500)
    g = path_gain(d, ch)
    assert np.all(np.diff(g) < 0)
    for c in (0.5, 2.0, 7.3):
        np.testing.assert_allclose(path_gain(c * d, ch), g * c ** -3.68, rtol=1e-12)


def test_noise_power():
    ch = ChannelParams(noise_psd_N0=dbm_per_hz_to_w(-100.0), bandwidth_B=20e6)
    expected = 10 ** ((-100 + 10 * math.log10(2e7) - 30) / 10)
    assert noise_power(ch) == pytest.approx(expected, rel=1e-12)
    assert noise_power(ch) == pytest.approx(2.000e-6, rel=1e-9)
    assert noise_power(ch_()) == 1.0
    assert noise_power(ch_(bandwidth_B=2.0)) == 2 * noise_power(ch_())


def test_mean_snr_examples():
    # gain 2e-6 at d0 and N = 2e-6 W
    ch = ch_(ref_gain_K0=2e-6, noise_psd_N0=2e-6)
    assert mean_snr(1.0, 1.0, ch) == pytest.approx(1.0, rel=1e-15)
    assert mean_snr(0.0, 1.0, ch) == 0.0
    ch = ch_(ref_gain_K0=1e-6, noise_psd_N0=2e-6)
    assert mean_snr(4.0, 1.0, ch) == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(ValueError):
        mean_snr(1.0, 0.0, ch)


def test_mean_snr_linear_in_power():
    ch = ChannelParams()
    for c in (0.1, 3.0):
        assert mean_snr(c * 1.7, 42.0, ch) == pytest.approx(c * mean_snr(1.7, 42.0, ch), rel=1e-13)


def test_channel_params_validation():
    with pytest.raises(ValueError):
        ChannelParams(pathloss_exp_beta=1.5)
    with pytest.raises(ValueError):
        ChannelParams(bandwidth_B=0.0)


# -- PER model ----------------------------------------------------------------

def test_per_instant_examples(unit_mode):
    assert per_instant(0.5, unit_mode) == pytest.approx(math.exp(-0.5), rel=1e-15)
    m = TxMode("e", 1.0, math.e, 1.0, 1.0)
    assert per_instant(2.0, m) == pytest.approx(math.exp(-1), rel=1e-15)
    assert per_instant(0.999, m) == 1.0


def test_per_rayleigh_examples(unit_mode):
    assert per_rayleigh(1.0, unit_mode) == pytest.approx(0.5, rel=1e-15)
    for m in default_mode_table():
        assert per_rayleigh(1e-9, m) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        per_rayleigh(0.0, unit_mode)


def test_per_rayleigh_monte_carlo_oracle():
    m = TxMode.continuous("q", 1.0, 90.25, 3.50)
    rng = np.random.default_rng(1234)
    samples = per_instant(rng.exponential(10.0, 10**6), m)
    assert per_rayleigh(10.0, m) == pytest.approx(samples.mean(), rel=0.01)


@pytest.mark.parametrize("gbar", [0.3, 1.0, 4.0, 31.6, 316.0])
def test_per_rayleigh_matches_quadrature(modes, gbar):
    for m in modes:
        def integrand(x):
            return per_instant(x, m) * math.exp(-x / gbar) / gbar
        lo, _ = integrate.quad(integrand, 0, m.thresh_gamma_p)
        hi, _ = integrate.quad(integrand, m.thresh_gamma_p, np.inf, epsabs=1e-13, limit=200)
        assert per_rayleigh(gbar, m) == pytest.approx(lo + hi, abs=1e-6)


def test_per_instant_non_increasing_random(modes):
    rng = np.random.default_rng(7)
    idx = rng.integers(0, len(modes), 10**4)
    gam = rng.uniform(0, 60, 10**4)
    for k, m in enumerate(modes):
        g = np.sort(gam[idx == k])
        p = per_instant(g, m)
        assert np.all((p >= 0) & (p <= 1))
        assert np.all(np.diff(p) <= 0)


@given(st.lists(st.floats(1e-3, 1e5), min_size=2, max_size=50, unique=True),
       st.integers(0, 5))
def test_per_rayleigh_decreasing(gbars, k):
    m = default_mode_table()[k]
    g = np.sort(gbars)
    p = per_rayleigh(g, m)
    assert np.all((p > 0) & (p <= 1))
    assert np.all(np.diff(p) <= 0)
    # strict wherever the values are resolvable in double precision
    resolvable = (p[:-1] < 1 - 1e-9) & (g[1:] > g[:-1] * (1 + 1e-6))
    assert np.all(np.diff(p)[resolvable] < 0)


# -- inverse ------------------------------------------------------------------

def test_required_mean_snr_examples(unit_mode, modes):
    assert required_mean_snr(0.5, unit_mode) == pytest.approx(1.0, rel=1e-9)
    for m in modes:
        for eps in (1e-3, 1e-2, 0.1):
            s = required_mean_snr(eps, m)
            assert abs(per_rayleigh(s, m) - eps) <= 1e-10 * eps
            assert per_rayleigh(s, m) <= eps
            assert per_rayleigh(s, m) == pytest.approx(eps, rel=1e-9)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 1.5])
def test_required_mean_snr_domain(unit_mode, eps):
    with pytest.raises(ValueError):
        required_mean_snr(eps, unit_mode)


def test_required_mean_snr_grid_oracle(modes):
    grid = np.logspace(-3, 6, 10**6)
    step = grid[1] / grid[0]
    for m in modes:
        for eps in (1e-3, 0.01, 0.2):
            k = np.argmin(np.abs(per_rayleigh(grid, m) - eps))
            s = required_mean_snr(eps, m)
            assert grid[k] / step <= s <= grid[k] * step


# -- single-link energy -----------------------------------------------------------

def test_min_link_energy_boundary_feasible():
    m = TxMode.continuous("only", 2.0, 50.0, 0.7)
    tbl = ModeTable((m,))
    ch = ChannelParams()
    eps, d, D = 0.01, 40.0, 1e7
    p_exact = required_mean_snr(eps, m) * noise_power(ch) / path_gain(d, ch)
    plan = min_link_energy(d, eps, D, ch, tbl, p_max=p_exact)
    assert plan.tx_power == pytest.approx(p_exact, rel=1e-12)
    assert plan.energy == pytest.approx(p_exact * D / (2.0 * ch.bandwidth_B), rel=1e-12)


def test_min_link_energy_scaling_beta2():
    tbl = ModeTable((TxMode.continuous("only", 1.0, 90.2514, 3.4998),))
    ch = ChannelParams(pathloss_exp_beta=2.0, ref_gain_K0=1e-1, ref_dist_d0=1.0)
    a = min_link_energy(30.0, 0.005, 1e7, ch, tbl, 100.0)
    b = min_link_energy(60.0, 0.005, 1e7, ch, tbl, 100.0)
    assert b.mode_index == a.mode_index
    assert b.tx_power == pytest.approx(4 * a.tx_power, rel=1e-12)
    assert b.energy == pytest.approx(4 * a.energy, rel=1e-12)


def test_min_link_energy_brute_force(modes, channel):
    d, eps, D, p_max = 60.0, 0.005, 1e7, 4.0
    plan = min_link_energy(d, eps, D, channel, modes, p_max)
    powers = np.linspace(p_max / 10**6, p_max, 10**6)
    gbar = mean_snr(powers, d, channel)
    best = (np.inf, None)
    for k, m in enumerate(modes):
        ok = np.flatnonzero(per_rayleigh(gbar, m) <= eps)
        if ok.size:
            e = powers[ok[0]] * D / (m.rate_Rn * channel.bandwidth_B)
            best = min(best, (e, k))
    assert plan.mode_index == best[1]
    assert plan.energy == pytest.approx(best[0], rel=1e-5)
    assert plan.energy <= best[0]


def test_min_link_energy_infeasible(modes, channel):
    with pytest.raises(InfeasibleError) as ei:
        min_link_energy(500.0, 0.01, 1e7, channel, modes, 4.0)
    assert ei.value.shortfall_w > 0
    # lowering the cap by the reported shortfall is exactly the cheapest power need
    need = min(required_mean_snr(0.01, m) for m in modes) * noise_power(channel) / path_gain(500.0, channel)
    assert ei.value.shortfall_w == pytest.approx(need - 4.0, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(10, 90), st.floats(1e-3, 0.05), st.floats(1.0, 3.0), st.floats(1.0, 3.0))
def test_min_link_energy_monotone(d, eps, eps_scale, p_scale):
    tbl, ch = default_mode_table(), ChannelParams()
    try:
        base = min_link_energy(d, eps, 1e7, ch, tbl, 4.0)
    except InfeasibleError:
        return
    looser = min_link_energy(d, min(eps * eps_scale, 0.99), 1e7, ch, tbl, 4.0)
    bigger = min_link_energy(d, eps, 1e7, ch, tbl, 4.0 * p_scale)
    assert looser.energy <= base.energy * (1 + 1e-12)
    assert bigger.energy <= base.energy * (1 + 1e-12)


# -- mode table --------------------------------------------------------------------

def test_default_table_invariants(modes):
    assert len(modes) == 6
    rates = [m.rate_Rn for m in modes]
    assert rates == sorted(rates) and len(set(rates)) == 6
    for m in modes:
        assert abs(m.coef_a * math.exp(-m.coef_g * m.thresh_gamma_p) - 1) <= 1e-6


def test_txmode_rejects_discontinuity():
    with pytest.raises(ValueError, match="discontinuous"):
        TxMode("bad", 1.0, 90.0, 3.5, 2.0)


def test_mode_table_rejects_unsorted():
    a = TxMode.continuous("a", 2.0, 10.0, 1.0)
    b = TxMode.continuous("b", 1.0, 10.0, 1.0)
    with pytest.raises(ValueError):
        ModeTable((a, b))
    with pytest.raises(ValueError):
        ModeTable(())


def test_load_mode_table_from_text():
    text = "label,rate,a,g,gamma_p_dB\nX,1.0,90.2514,3.4998,1.0942\n"
    tbl = load_mode_table(text)
    assert tbl[0].thresh_gamma_p == pytest.approx(math.log(90.2514) / 3.4998, rel=1e-15)


@pytest.mark.parametrize("text,needle", [
    ("label,rate,a,g\nX,1,2,3\n", "header"),
    ("label,rate,a,g,gamma_p_dB\nX,1.0,90.25,3.5,5.0\n", "inconsistent"),
    ("label,rate,a,g,gamma_p_dB\nX,one,90.25,3.5,1.09\n", "non-numeric"),
    ("label,rate,a,g,gamma_p_dB\nX,1,90.25,3.5\n", "columns"),
])
def test_load_mode_table_errors(text, needle):
    with pytest.raises(ConfigError, match=needle) as ei:
        load_mode_table(text)
    assert ei.value.line is not None
