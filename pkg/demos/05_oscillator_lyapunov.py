"""Random harmonic oscillator analogy: energy growth rate = w^2 |gamma_c(w)|.

With purely temporal fluctuations the wave problem maps to a random
oscillator whose energy grows exponentially at the same rate that amplifies
the pulse in rapidly changing media.

Run:  python demos/05_oscillator_lyapunov.py   (about a minute)
"""

import numpy as np

from stochwave.ensemble import run_oscillator_ensemble
from stochwave.medium import AutocorrSpec, MediumSpec
from stochwave.theory import gamma_of_omega, oscillator_rate, psi_kernel

spec = MediumSpec(epsilon=0.1, alpha=2.0, beta=1.0, n_modes=512)
table = gamma_of_omega(psi_kernel(AutocorrSpec(), "fast", 1.0),
                       np.linspace(-8 * np.pi, 8 * np.pi, 1025))

print("omega   measured rate   predicted w^2|gamma_c|   seeds")
for omega in (1.0, 2.0):
    run = run_oscillator_ensemble(spec, omega, 60, 9000, Z_max=12.0)
    pred = oscillator_rate(table, omega)
    print(f"{omega:4.1f}   {run.lyapunov.mean():13.4f}   {pred:21.4f}   60")

run = run_oscillator_ensemble(spec, 1.0, 1, 9000, Z_max=12.0)
Z, E = run.Z, run.energy[0]
print("\nsingle realization, omega = 1: energy e-folds along Z")
for i in range(0, Z.size, Z.size // 6):
    print(f"  Z = {Z[i]:5.1f}   log10 energy / energy(0) = {np.log10(E[i] / E[0]):6.2f}")
