"""The deterministic limit front two ways: Volterra march vs frequency domain.

Slowly changing media fade the pulse (gamma_c >= 0); rapidly changing media
feed energy into it (gamma_c <= 0).

Run:  python demos/02_limit_front_two_routes.py
"""

import numpy as np

from stochwave.medium import AutocorrSpec, make_pulse
from stochwave.theory import gamma_of_omega, limit_volterra, psi_kernel, stable_front

pulse = make_pulse("gabor", 4.0)
omega = np.linspace(-8 * np.pi, 8 * np.pi, 1025)
taus = [0.25, 0.5, 1.0]

for regime in ("slow", "fast"):
    kernel = psi_kernel(AutocorrSpec(), regime, c_o=1.0)
    table = gamma_of_omega(kernel, omega)
    lf = stable_front(pulse, table, taus, dx=1 / 256.0, s_max=16.0)
    lv = limit_volterra(pulse, kernel, 1.0, tau_grid=taus, dx=1 / 256.0, s_max=16.0)
    ds = lf.s[1] - lf.s[0]
    print(f"\n{regime} regime (gamma_c(0) = {float(kernel.gamma_c(0.0)):+.3f}):")
    print("  tau    cross-method rel L2    front energy")
    for j, tau in enumerate(taus):
        d = np.linalg.norm(lf.values[j] - lv.values[j + 1]) / np.linalg.norm(lf.values[j])
        e = np.sum(lf.values[j] ** 2) * ds
        print(f"  {tau:4.2f}   {d:.2e}              {e:.6f}")
    print(f"  pulse energy: {np.sum(pulse(lf.s) ** 2) * ds:.6f} "
          f"({'fades' if regime == 'slow' else 'grows'})")
