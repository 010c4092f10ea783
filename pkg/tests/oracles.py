"""Independent reference computations used to check the library.

Nothing here calls into the library's solvers: the averaged-PER inverse is
a secant iteration from scipy, relay allocation is an exhaustive grid, and
trajectory optimisation is full enumeration.
"""

import itertools
import math

import numpy as np
from scipy import optimize


def per_avg(gbar, a, g, gp):
    """Rayleigh-averaged PER of the piecewise-exponential model, written out directly."""
    gbar = np.asarray(gbar, dtype=float)
    return (1.0 - np.exp(-gp / gbar)) + a / (1.0 + g * gbar) * np.exp(-gp * (1.0 / gbar + g))


def snr_for_per(eps, a, g, gp):
    """Mean SNR with averaged PER == eps (vectorised secant in log-SNR)."""
    eps = np.asarray(eps, dtype=float)
    a, g, gp = (np.broadcast_to(np.asarray(v, dtype=float), eps.shape) for v in (a, g, gp))
    # large-SNR asymptote PER ~ (gp + 1/g) / gbar is a close starting point
    u0 = np.log((gp + 1.0 / g) / eps)
    f = lambda u: np.log(per_avg(np.exp(u), a, g, gp)) - np.log(eps)
    u = optimize.newton(f, u0, x1=u0 + 0.01, tol=1e-10, maxiter=100)
    return np.exp(u)


def relay_brute_force(d_sr, d_rb, eps, data_D, ch, modes, p_max, n_split=10**4):
    """Exhaustive relay allocation: every mode pair times an n_split split grid."""
    N = ch.noise_psd_N0 * ch.bandwidth_B
    gain = lambda d: ch.ref_gain_K0 * (d / ch.ref_dist_d0) ** (-ch.pathloss_exp_beta)
    G1, G2 = gain(d_sr), gain(d_rb)
    # open grid on (0, eps); the second hop takes the exact complement
    e1 = eps * (np.arange(1, n_split + 1) - 0.5) / n_split
    e2 = 1.0 - (1.0 - eps) / (1.0 - e1)
    p1s = [snr_for_per(e1, m.coef_a, m.coef_g, m.thresh_gamma_p) * N / G1 for m in modes]
    p2s = [snr_for_per(e2, m.coef_a, m.coef_g, m.thresh_gamma_p) * N / G2 for m in modes]
    best = (math.inf, None, None)
    for i, m1 in enumerate(modes):
        p1 = p1s[i]
        for j, m2 in enumerate(modes):
            p2 = p2s[j]
            en = (p1 / m1.rate_Rn + p2 / m2.rate_Rn) * data_D / ch.bandwidth_B
            en = np.where((p1 <= p_max) & (p2 <= p_max), en, np.inf)
            k = int(np.argmin(en))
            if en[k] < best[0]:
                best = (float(en[k]), (i, j), float(e1[k]))
    return best


def enumerate_trajectories(x0, comm, points, reach_radius, joules_per_m):
    """Minimum total energy over every cell sequence, by full enumeration.

    ``comm[t]`` holds the communication energy of each cell at step t (inf if
    infeasible). Moves longer than ``reach_radius`` are forbidden.
    """
    T = len(comm)
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    step0 = np.linalg.norm(pts - np.asarray(x0, dtype=float), axis=1)
    pair = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    tol = reach_radius * (1 + 1e-12)
    best, arg = math.inf, None
    for seq in itertools.product(range(n), repeat=T):
        if step0[seq[0]] > tol:
            continue
        cost = joules_per_m * step0[seq[0]] + comm[0][seq[0]]
        ok = True
        for t in range(1, T):
            d = pair[seq[t - 1], seq[t]]
            if d > tol:
                ok = False
                break
            cost += joules_per_m * d + comm[t][seq[t]]
        if ok and cost < best:
            best, arg = cost, seq
    return best, arg
