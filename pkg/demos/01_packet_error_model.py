"""
Packet error rate under Rayleigh fading
=======================================

Each AMC mode has a piecewise-exponential PER curve in the instantaneous
SNR. Averaging it over an exponentially distributed SNR gives a closed form,
which we compare against sampling and then invert.
"""

import numpy as np

from jcmp import default_mode_table, per_instant, per_rayleigh, required_mean_snr

modes = default_mode_table()
for m in modes:
    print(f"{m.label:10s} rate {m.rate_Rn:3.1f} b/sym  threshold {10 * np.log10(m.thresh_gamma_p):6.2f} dB")

# the curve is flat at 1 below the threshold and decays exponentially above it
qpsk = modes[1]
snr = np.array([0.5, 1.0, 2.0, 4.0])
print("\ninstantaneous PER, QPSK-1/2:", per_instant(snr, qpsk))

# closed-form average vs 10^6 fading draws at 10 dB mean SNR
rng = np.random.default_rng(1)
draws = rng.exponential(10.0, 10**6)
print(f"\naveraged PER at 10 dB: closed form {per_rayleigh(10.0, qpsk):.5f}, "
      f"sampled {per_instant(draws, qpsk).mean():.5f}")

# mean SNR needed for a 1% average PER, per mode
for m in modes:
    need = required_mean_snr(0.01, m)
    print(f"{m.label:10s} needs {10 * np.log10(need):5.2f} dB for PER 0.01")
