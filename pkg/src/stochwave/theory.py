"""Deterministic limit theory: regime kernels, gamma(omega), limit fronts.

Every regime's integral kernel has the form Psi(s) = A * phi''(B s) with
phi(x) = exp(-pi x^2):

    slow           A = -1,              B = c_o      (spatial mechanism)
    fast           A = 1 / c_o^2,       B = 1        (temporal mechanism)
    translational  A = (v/c_o)^2 - 1,   B = c_o + v

The frequency response splits as

    omega^2 gamma(omega) = (c_o/4) * int_0^inf Psi(u) exp(2 i omega u) du,

computed by damped quadrature (the raw route), while the attenuation and
dispersion parts gamma_c, gamma_s come from closed-form Gaussian cosine and
sine transforms (the regular route).  Both routes are exposed so their
consistency identities can be tested against each other.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import dawsn

from .errors import GridResolutionError, InstabilityError, SpecValidationError
from .medium import (AutocorrSpec, Pulse, REGIME_FAST, REGIME_SLOW,
                     REGIME_TRANSLATIONAL, SEPARABLE_GAUSSIAN, TRANSLATIONAL,
                     gaussian_profile_dd)

_SQRT_PI = np.sqrt(np.pi)


def gaussian_cos_halfline(k):
    """int_0^inf exp(-pi x^2) cos(k x) dx = (1/2) exp(-k^2 / 4 pi)."""
    k = np.asarray(k, dtype=float)
    return 0.5 * np.exp(-k * k / (4.0 * np.pi))


def gaussian_sin_halfline(k):
    """int_0^inf exp(-pi x^2) sin(k x) dx = dawsn(k / 2 sqrt(pi)) / sqrt(pi)."""
    k = np.asarray(k, dtype=float)
    return dawsn(k / (2.0 * _SQRT_PI)) / _SQRT_PI


@dataclass(frozen=True)
class RegimeKernel:
    """Integral kernel Psi(s) = A phi''(B s) of the limit evolution."""

    regime: str
    autocorr: AutocorrSpec
    c_o: float
    A: float
    B: float

    def psi(self, s):
        return self.A * gaussian_profile_dd(self.B * np.asarray(s, dtype=float))

    def psi_derivatives_at_zero(self, orders=(0, 2, 4)):
        # phi^(2m)(0) = (2m)! (-pi)^m / m! for phi = exp(-pi x^2)
        from math import factorial

        out = []
        for n in orders:
            m = (n + 2) // 2
            phi_d = factorial(2 * m) * (-np.pi) ** m / factorial(m)
            out.append(self.A * self.B**n * phi_d)
        return out

    @property
    def support_radius(self):
        """Truncation point where |Psi| < 1e-15 (Gaussian decay)."""
        return 4.0 / self.B

    @property
    def shift_coeff(self):
        """q in imag(gamma) = gamma_s + q/omega, the pure-delay part of gamma.

        Integration by parts of the half-line transform of A phi''(B u) with
        phi(0) = 1 gives q = c_o A / (2 B^2); the remaining cos/sin
        transforms of phi itself form gamma_c and gamma_s below.  The generic
        forms reproduce the regime formulas: slow -1/2c_o, fast +1/2c_o,
        translational (v - c_o)/(2 c_o (c_o + v)).
        """
        return self.c_o * self.A / (2.0 * self.B**2)

    def gamma_c(self, omega):
        """Attenuation (slow) / amplification (fast) part, closed form."""
        omega = np.asarray(omega, dtype=float)
        return -(self.c_o * self.A / self.B**3) * gaussian_cos_halfline(2.0 * omega / self.B)

    def gamma_s(self, omega):
        """Dispersion part, closed form."""
        omega = np.asarray(omega, dtype=float)
        return -(self.c_o * self.A / self.B**3) * gaussian_sin_halfline(2.0 * omega / self.B)


def psi_kernel(autocorr: AutocorrSpec, regime: str, c_o: float = 1.0) -> RegimeKernel:
    """Build the regime's integral kernel from an autocorrelation spec."""
    autocorr.validate(c_o)
    if regime == REGIME_TRANSLATIONAL:
        if autocorr.kind != TRANSLATIONAL:
            raise SpecValidationError("translational kernel requested from a separable autocorrelation")
        v = autocorr.v
        return RegimeKernel(regime, autocorr, c_o, (v / c_o) ** 2 - 1.0, c_o + v)
    if autocorr.kind != SEPARABLE_GAUSSIAN:
        raise SpecValidationError(f"regime {regime!r} requires the separable autocorrelation")
    if regime == REGIME_SLOW:
        return RegimeKernel(regime, autocorr, c_o, -1.0, c_o)
    if regime == REGIME_FAST:
        return RegimeKernel(regime, autocorr, c_o, 1.0 / c_o**2, 1.0)
    raise SpecValidationError(f"unknown regime {regime!r}")


# ---------------------------------------------------------------------------
# gamma(omega) tables
# ---------------------------------------------------------------------------

_QUAD_POINTS = 16384          # Simpson points for the half-line transform
_ASYMPTOTIC_SWITCH = 48.0     # |omega| beyond which the tail series is used


def halfline_transform(kernel: RegimeKernel, omega):
    """int_0^inf Psi(u) exp(2 i omega u) du, vectorized over omega.

    Composite Simpson on [0, support_radius] below the switch frequency;
    integration-by-parts tail series (pure imaginary, odd derivatives of Psi
    vanish) above it.  Accurate to ~1e-10 absolute across both branches.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.empty(omega.shape, dtype=complex)
    near = np.abs(omega) <= _ASYMPTOTIC_SWITCH
    if np.any(near):
        u_max = kernel.support_radius
        n = _QUAD_POINTS
        u = np.linspace(0.0, u_max, n + 1)
        h = u[1] - u[0]
        wts = np.full(n + 1, 2.0)
        wts[1::2] = 4.0
        wts[0] = wts[-1] = 1.0
        wts *= h / 3.0
        psi_w = kernel.psi(u) * wts
        om = omega[near]
        vals = np.empty(om.shape, dtype=complex)
        chunk = 256
        for i in range(0, om.size, chunk):
            oc = om[i:i + chunk]
            vals[i:i + chunk] = np.exp(2j * np.multiply.outer(oc, u)) @ psi_w
        out[near] = vals
    if np.any(~near):
        om = omega[~near]
        p0, p2, p4 = kernel.psi_derivatives_at_zero()
        out[~near] = 1j * (p0 / (2.0 * om) - p2 / (8.0 * om**3) + p4 / (32.0 * om**5))
    return out


def exponent_rate(kernel: RegimeKernel, omega):
    """omega^2 gamma(omega) = (c_o/4) * halfline transform; entire in omega."""
    return 0.25 * kernel.c_o * halfline_transform(kernel, omega)


@dataclass(frozen=True)
class KernelTable:
    """Sampled frequency response of one regime.

    gamma is the raw kernel (NaN at omega = 0 where it has a 1/omega pole);
    omega2_gamma = omega^2 gamma(omega) is regular everywhere.  gamma_c and
    gamma_s are the regular closed forms.  D and h are the travel-time
    diffusion coefficient and drift.
    """

    omega: np.ndarray
    gamma: np.ndarray
    gamma_c: np.ndarray
    gamma_s: np.ndarray
    omega2_gamma: np.ndarray
    D: float
    h: float
    regime: str
    c_o: float
    v: float
    kernel: RegimeKernel
    kernel_z: Optional[float] = None
    kernel_s: Optional[np.ndarray] = None
    kernel_vals: Optional[np.ndarray] = None

    def gamma_c_at(self, omega):
        return self.kernel.gamma_c(omega)

    def gamma_s_at(self, omega):
        return self.kernel.gamma_s(omega)


def _assemble_table(kernel: RegimeKernel, omega_grid) -> KernelTable:
    omega = np.asarray(omega_grid, dtype=float)
    m = exponent_rate(kernel, omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = np.where(omega == 0.0, np.nan + 1j * np.nan, m / np.where(omega == 0.0, 1.0, omega) ** 2)
    gc = kernel.gamma_c(omega)
    gs = kernel.gamma_s(omega)
    c = kernel.c_o
    if kernel.regime == REGIME_SLOW:
        D = np.sqrt(2.0 * c * float(kernel.gamma_c(0.0)))
        h = 0.0
    elif kernel.regime == REGIME_FAST:
        # D^2 = int Phi(t,0) dt = -2 c_o gamma_c(0)
        D = np.sqrt(-2.0 * c * float(kernel.gamma_c(0.0)))
        h = -1.0
    else:
        phi_hat0 = 2.0 * float(gaussian_cos_halfline(0.0))
        D = np.sqrt(phi_hat0 / (c - kernel.autocorr.v))
        h = 0.0
    return KernelTable(omega, gamma, gc, gs, m, float(D), h, kernel.regime, c,
                       kernel.autocorr.v, kernel)


def gamma_of_omega(kernel: RegimeKernel, omega_grid) -> KernelTable:
    """Tabulate gamma and its decomposition on a frequency grid."""
    return _assemble_table(kernel, omega_grid)


def translational_gamma(v: float, phi_spec: AutocorrSpec, omega_grid, c_o: float = 1.0) -> KernelTable:
    """Kernel table for a medium in uniform translational motion at speed v."""
    if not abs(v) < c_o:
        raise SpecValidationError(f"translational medium requires |v| < c_o, got v={v}, c_o={c_o}")
    spec = replace(phi_spec, kind=TRANSLATIONAL, v=float(v))
    spec.validate(c_o)
    kernel = psi_kernel(spec, REGIME_TRANSLATIONAL, c_o)
    return _assemble_table(kernel, omega_grid)


# ---------------------------------------------------------------------------
# Limit wave front
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitFront:
    """Deterministic limit front a_bar(tau, s) sampled on a (tau, s) grid."""

    tau: np.ndarray
    s: np.ndarray
    values: np.ndarray          # shape (n_tau, n_s)
    pulse_kind: str
    regime: str

    def at(self, tau):
        i = int(np.argmin(np.abs(self.tau - tau)))
        if not np.isclose(self.tau[i], tau, rtol=0, atol=1e-12):
            raise ValueError(f"tau={tau} not on the stored grid")
        return self.values[i]


def _front_grid(pulse: Pulse, s_max, dx):
    if s_max is None:
        s_max = pulse.support + 12.0
    n = int(round(s_max / dx))
    return np.arange(n) * dx


_FFT_PAD = 16.0   # padding (in s units) between domain end and wraparound


def _fft_machinery(pulse: Pulse, s_grid):
    """Uniformity checks plus the padded FFT grid shared by the front builders."""
    dx = s_grid[1] - s_grid[0]
    if not np.allclose(np.diff(s_grid), dx, rtol=0, atol=1e-12) or abs(s_grid[0]) > 1e-12:
        raise GridResolutionError("front evaluation requires a uniform s grid starting at 0")
    n_out = s_grid.size
    n_fft = 1
    while n_fft < n_out + int(np.ceil(_FFT_PAD / dx)):
        n_fft *= 2
    omega = 2.0 * np.pi * np.fft.fftfreq(n_fft, d=dx)
    f_samp = pulse(np.arange(n_fft) * dx)
    fhat = dx * n_fft * np.fft.ifft(f_samp)   # f_hat(omega_m) with e^{+i omega s}
    return dx, n_fft, omega, f_samp, fhat


def _leak_check(pulse: Pulse, omega, fhat):
    peak = np.max(np.abs(fhat))
    nyq = np.max(np.abs(fhat[np.abs(omega) > 0.9 * np.max(np.abs(omega))]))
    if nyq > 1e-6 * peak:
        raise GridResolutionError(
            f"s grid too coarse: pulse spectrum at the Nyquist edge is {nyq / peak:.2e} of peak"
        )


def stable_front(pulse: Pulse, table: KernelTable, tau_grid, s_grid=None,
                 s_max=None, dx=1.0 / 64.0) -> LimitFront:
    """Limit front via the explicit frequency-domain representation.

    a_bar(tau, s) = (1/2pi) int f_hat(w) exp(-i w s - c_o tau w^2 gamma(w)) dw,
    evaluated on a padded FFT grid; tau = 0 returns the sampled pulse exactly.
    """
    tau_grid = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    if s_grid is None:
        s_grid = _front_grid(pulse, s_max, dx)
    else:
        s_grid = np.asarray(s_grid, dtype=float)
    dx, n_fft, omega, f_samp, fhat = _fft_machinery(pulse, s_grid)
    _leak_check(pulse, omega, fhat)
    m = exponent_rate(table.kernel, omega)
    n_out = s_grid.size
    values = np.empty((tau_grid.size, n_out))
    for i, tau in enumerate(tau_grid):
        if tau == 0.0:
            values[i] = f_samp[:n_out]
            continue
        mult = np.exp(-table.c_o * tau * m)
        a = np.real(np.fft.fft(fhat * mult)) / (n_fft * dx)
        edge = np.max(np.abs(a[-max(8, int(2.0 / dx)):]))
        if edge > 1e-7 * max(np.max(np.abs(a)), 1e-300):
            raise GridResolutionError(
                f"wraparound detected at tau={tau}: front amplitude {edge:.2e} at the padded edge"
            )
        values[i] = a[:n_out]
    return LimitFront(tau_grid, s_grid, values, pulse.kind, table.regime)


def limit_volterra(pulse: Pulse, kernel: RegimeKernel, tau_max, steps=None,
                   tau_grid=None, s_grid=None, s_max=None, dx=1.0 / 64.0) -> LimitFront:
    """Limit front by marching the initial value problem

        d a/d tau = -(c_o^2/8) int_0^s a(tau, y) Psi((s-y)/2) dy,  a(0, .) = f,

    with classical RK4 in tau and composite trapezoid quadrature in y.
    """
    if tau_grid is None:
        tau_grid = np.array([0.0, float(tau_max)])
    tau_grid = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    if tau_grid[0] != 0.0:
        tau_grid = np.concatenate([[0.0], tau_grid])
    if s_grid is None:
        s_grid = _front_grid(pulse, s_max, dx)
    else:
        s_grid = np.asarray(s_grid, dtype=float)
    dx = s_grid[1] - s_grid[0]
    n = s_grid.size
    if dx > 1.0 / 32.0 + 1e-15:
        raise GridResolutionError(f"ds={dx} exceeds 1/32: need >= 32 points per carrier period")
    if steps is None:
        steps = max(32, int(np.ceil(128 * (tau_grid[-1] - tau_grid[0]))))

    g = kernel.psi(0.5 * s_grid)                       # Psi((s_i - s_j)/2) samples
    n_conv = 2 * n
    g_hat = np.fft.rfft(g, n_conv)
    coeff = -kernel.c_o**2 / 8.0

    def L(a):
        conv = np.fft.irfft(np.fft.rfft(a, n_conv) * g_hat, n_conv)[:n]
        return coeff * dx * (conv - 0.5 * a[0] * g - 0.5 * a * g[0])

    a = pulse(s_grid)
    norm0 = np.linalg.norm(a)
    values = [a.copy()]
    for seg in range(tau_grid.size - 1):
        span = tau_grid[seg + 1] - tau_grid[seg]
        n_steps = max(1, int(np.ceil(steps * span / max(tau_grid[-1], 1e-300))))
        ht = span / n_steps
        for _ in range(n_steps):
            k1 = L(a)
            k2 = L(a + 0.5 * ht * k1)
            k3 = L(a + 0.5 * ht * k2)
            k4 = L(a + ht * k3)
            a = a + (ht / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if norm0 > 0 and np.linalg.norm(a) > 10.0 * norm0:
            raise InstabilityError(f"front norm exceeded 10x initial at tau={tau_grid[seg + 1]}")
        values.append(a.copy())
    return LimitFront(tau_grid, s_grid, np.array(values), pulse.kind, kernel.regime)


# ---------------------------------------------------------------------------
# Pulse shaping kernel
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BandedKernel:
    """Band-limited samples of the shaping kernel K(z, s) on a symmetric s grid.

    The sampled values are for inspection and export; convolution against a
    pulse goes through apply_kernel, which multiplies in the frequency domain
    (the band-limited kernel has slowly decaying sinc tails, so a truncated
    real-space convolution would lose accuracy).
    """

    z: float
    s: np.ndarray
    values: np.ndarray
    band: float
    banded: bool
    regime: str
    dx: float
    n_fft: int
    khat: np.ndarray


def shaping_kernel(table: KernelTable, z: float, s_half=16.0, dx=1.0 / 64.0,
                   pulse: Optional[Pulse] = None, band: Optional[float] = None) -> BandedKernel:
    """Sample K(z, s) = (1/2pi) int_band exp(-i w s - z w^2 (gamma_c + i gamma_s)) dw.

    The kernel is a distribution; only its band-limited version is ever
    materialized (banded flag always set).  The band defaults to where the
    pulse spectrum exceeds 1e-9 of its peak, capped at the grid Nyquist.
    """
    n = 1
    while n * dx < 2.0 * s_half:
        n *= 2
    omega = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    nyquist = np.pi / dx
    if band is None:
        if pulse is not None:
            # band edge from a spectrally accurate FFT of the sampled pulse
            fhat = np.abs(dx * n * np.fft.ifft(pulse(np.arange(n) * dx)))
            live = np.nonzero(fhat >= 1e-11 * fhat.max())[0]
            band = float(np.max(np.abs(omega[live]))) if live.size else nyquist
        else:
            band = nyquist
    band = min(band, nyquist)
    window = (np.abs(omega) <= band).astype(float)
    m = omega**2 * (table.kernel.gamma_c(omega) + 1j * table.kernel.gamma_s(omega))
    khat = np.exp(-z * m) * window
    # index j holds s = j dx modulo the period; roll so s = 0 sits mid-array
    k = np.real(np.fft.fft(khat)) / (n * dx)
    half = n // 2
    s = (np.arange(n) - half) * dx
    k = np.roll(k, half)
    keep = np.abs(s) <= s_half
    return BandedKernel(float(z), s[keep], k[keep], band, True, table.regime,
                        dx, n, khat)


def apply_kernel(kernel: BandedKernel, pulse: Pulse, s_out) -> np.ndarray:
    """(f * K)(s) on the requested grid (grid spacing must match the kernel's).

    Spectral multiplication on the kernel's periodic grid; s_out values are
    interpreted modulo the period, so they must stay inside one period of the
    kernel grid (guaranteed for front windows far smaller than 2 * s_half).
    """
    s_out = np.asarray(s_out, dtype=float)
    dx, n = kernel.dx, kernel.n_fft
    f_samp = pulse(np.arange(n) * dx)
    fhat = dx * n * np.fft.ifft(f_samp)
    conv = np.real(np.fft.fft(fhat * kernel.khat)) / (n * dx)
    idx = s_out / dx
    ii = np.round(idx).astype(int)
    if np.max(np.abs(idx - ii)) > 1e-8:
        raise GridResolutionError("s_out is not aligned with the kernel grid")
    return conv[np.mod(ii, n)]


def oscillator_rate(table: KernelTable, omega: float) -> float:
    """Predicted Lyapunov rate omega^2 |gamma_c(omega)| of the random oscillator."""
    lo, hi = float(np.min(table.omega)), float(np.max(table.omega))
    if not lo <= omega <= hi:
        raise ValueError(f"omega={omega} outside the table range [{lo}, {hi}]")
    return float(omega**2 * np.abs(table.kernel.gamma_c(omega)))
