"""Build a random medium realization and a source pulse, check the statistics.

Run:  python demos/01_medium_and_pulse.py
"""

import numpy as np

from stochwave.medium import MediumSpec, build_field, make_pulse

spec = MediumSpec(epsilon=0.1, alpha=1.0, beta=2.0, seed=7)
field = build_field(spec)

print(f"regime: {spec.regime}, modes: {field.n_modes}, |mu| bound: {field.bound:.2f}")
print(f"sample values mu(0.3, 1.7) = {field.mu(0.3, 1.7):+.4f}, "
      f"mu_z = {field.mu_z(0.3, 1.7):+.4f}")

# ensemble autocorrelation at a few lags vs the separable Gaussian target
lags = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (1.0, 1.0)]
n = 4000
acc = np.zeros(len(lags))
for i in range(n):
    f = build_field(MediumSpec(epsilon=0.1, alpha=1.0, beta=2.0, seed=i))
    base = f.mu(1.3, 2.7)
    for j, (lt, lz) in enumerate(lags):
        acc[j] += base * f.mu(1.3 + lt, 2.7 + lz)
acc /= n
print("\nlag (t,z)   empirical   target")
for (lt, lz), emp in zip(lags, acc):
    print(f"({lt:3.1f},{lz:3.1f})   {emp:+.4f}    {float(spec.autocorr.phi(lt, lz)):+.4f}")

pulse = make_pulse("gabor", 4.0)
omega = np.linspace(0.0, 15.0, 2000)
spectrum = np.abs(pulse.spectrum(omega))
peak = omega[np.argmax(spectrum)]
print(f"\npulse support [0, {pulse.support}], spectrum peak at omega = {peak:.3f} "
      f"(carrier 2 pi = {2 * np.pi:.3f})")
print(f"|f_hat(0)| / peak = {spectrum[0] / spectrum.max():.2e}")
