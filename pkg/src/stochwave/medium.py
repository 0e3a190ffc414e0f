"""Random medium synthesis: stationary fluctuation fields and source pulses.

The fluctuation field mu(t, z) is built by randomized spectral superposition,

    mu(t, z) = sqrt(2/N) * sum_j cos(w_j t + k_j z + phi_j),

with (w_j, k_j) drawn from the spectral density of the target autocorrelation
and phi_j uniform on [0, 2pi).  For any number of modes the ensemble
autocorrelation is exactly the target; sample paths are trigonometric
polynomials, hence smooth and uniformly bounded with explicitly computable
bounds on the field and its first and second derivatives.
"""

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import SpecValidationError

SEPARABLE_GAUSSIAN = "separable-gaussian"
TRANSLATIONAL = "translational"

REGIME_SLOW = "slow"
REGIME_FAST = "fast"
REGIME_TRANSLATIONAL = "translational"

# Unit-width Gaussian profile exp(-pi x^2): value 1 at the origin and unit
# integral, the normalization every formula below assumes.
_SQRT_2PI = np.sqrt(2.0 * np.pi)

# Smooth truncation ramp applied ahead of the range cutoff, in units of the
# (dimensionless) correlation length.
CUTOFF_RAMP_WIDTH = 5.0


def gaussian_profile(x):
    """exp(-pi x^2), the normalized autocorrelation profile."""
    x = np.asarray(x, dtype=float)
    return np.exp(-np.pi * x * x)


def gaussian_profile_dd(x):
    """Second derivative of exp(-pi x^2)."""
    x = np.asarray(x, dtype=float)
    return (4.0 * np.pi**2 * x * x - 2.0 * np.pi) * np.exp(-np.pi * x * x)


@dataclass(frozen=True)
class AutocorrSpec:
    """Target autocorrelation of the scaled fluctuations.

    kind 'separable-gaussian' means Phi(t, z) = exp(-pi t^2) exp(-pi z^2);
    kind 'translational' means mu(t, z) = eta(z - v t) with a one-argument
    process eta of autocorrelation exp(-pi z^2).  The unit widths are forced
    by the normalization Phi(0,0) = 1 with unit integrals along the axes.
    """

    kind: str = SEPARABLE_GAUSSIAN
    time_width: float = 1.0
    space_width: float = 1.0
    v: float = 0.0

    def validate(self, c_o=1.0):
        problems = []
        if self.kind not in (SEPARABLE_GAUSSIAN, TRANSLATIONAL):
            problems.append(f"unknown autocorrelation kind {self.kind!r}")
        if self.kind == SEPARABLE_GAUSSIAN and self.v != 0.0:
            problems.append("translation speed v only applies to the translational kind")
        if self.kind == TRANSLATIONAL and not abs(self.v) < c_o:
            problems.append(f"translational medium requires |v| < c_o, got v={self.v}, c_o={c_o}")
        # The Gaussian family admits no other width: a profile a*exp(-pi x^2/b^2)
        # cannot have both unit origin value and unit integral unless a = b = 1.
        for name, val in (("time_width", self.time_width), ("space_width", self.space_width)):
            if not np.isclose(val, 1.0, rtol=0, atol=1e-12):
                problems.append(f"{name}={val} is non-normalizable (unit value and unit integral force width 1)")
        if problems:
            raise SpecValidationError("; ".join(problems))

    def phi(self, t, z):
        """Autocorrelation Phi(t, z) = E[mu(t0+t, z0+z) mu(t0, z0)]."""
        if self.kind == TRANSLATIONAL:
            return gaussian_profile(np.asarray(z, dtype=float) - self.v * np.asarray(t, dtype=float))
        return gaussian_profile(t) * gaussian_profile(z)

    def phi_space(self, z):
        return self.phi(0.0, z)

    def phi_time(self, t):
        return self.phi(t, 0.0)


@dataclass(frozen=True)
class MediumSpec:
    """Scaled description of one random medium.

    Admissible scaling regimes:
      slow          alpha <= 1, beta = 2   (separable autocorrelation)
      fast          alpha = 2,  beta <= 1  (separable autocorrelation)
      translational alpha = beta = 2 with the translational autocorrelation
    """

    epsilon: float
    alpha: float
    beta: float
    c_o: float = 1.0
    autocorr: AutocorrSpec = dataclass_field(default_factory=AutocorrSpec)
    n_modes: int = 64
    seed: int = 0
    L: float = 2.0

    def __post_init__(self):
        self.validate()

    @property
    def regime(self):
        if self.autocorr.kind == TRANSLATIONAL:
            return REGIME_TRANSLATIONAL
        if self.beta == 2.0 and self.alpha <= 1.0:
            return REGIME_SLOW
        return REGIME_FAST

    def validate(self):
        problems = []
        if not 0.0 < self.epsilon < 1.0:
            problems.append(f"epsilon={self.epsilon} outside (0, 1)")
        if self.c_o <= 0.0:
            problems.append(f"c_o={self.c_o} must be positive")
        if self.L <= 0.0:
            problems.append(f"L={self.L} must be positive")
        if self.n_modes < 0:
            problems.append(f"n_modes={self.n_modes} must be >= 0")
        a, b = self.alpha, self.beta
        if self.autocorr.kind == TRANSLATIONAL:
            if not (a == 2.0 and b == 2.0):
                problems.append(f"translational media require alpha = beta = 2, got ({a}, {b})")
        elif not ((a <= 1.0 and b == 2.0) or (a == 2.0 and b <= 1.0)):
            problems.append(
                f"(alpha, beta) = ({a}, {b}) is not admissible: "
                "need alpha <= 1 with beta = 2 (slow), alpha = 2 with beta <= 1 (fast), "
                "or the translational case alpha = beta = 2"
            )
        if problems:
            raise SpecValidationError("; ".join(problems))
        try:
            self.autocorr.validate(self.c_o)
        except SpecValidationError as exc:
            raise SpecValidationError(str(exc)) from None

    @property
    def cutoff_end(self):
        """Scaled range L / eps^beta beyond which fluctuations vanish."""
        return self.L / self.epsilon**self.beta

    @property
    def cutoff_start(self):
        return self.cutoff_end - CUTOFF_RAMP_WIDTH


@dataclass(frozen=True)
class FieldBounds:
    mu: float
    mu_t: float
    mu_z: float
    mu_tt: float
    mu_zz: float


@dataclass(frozen=True)
class StationaryField:
    """One realization of the fluctuation field as a finite harmonic sum.

    Evaluation clips the scaled range argument to z >= 0 and applies a smooth
    cos^2 cutoff over [cutoff_start, cutoff_end] so that fluctuations vanish
    beyond the (scaled) truncation range, keeping mu_z bounded.
    """

    w: np.ndarray
    k: np.ndarray
    phase: np.ndarray
    amplitude: float
    cutoff_start: float
    cutoff_end: float
    seed: int
    kind: str = SEPARABLE_GAUSSIAN
    v: float = 0.0

    @property
    def n_modes(self):
        return self.w.size

    @property
    def bounds(self):
        n = self.n_modes
        if n == 0 or self.amplitude == 0.0:
            return FieldBounds(0.0, 0.0, 0.0, 0.0, 0.0)
        a = self.amplitude
        width = self.cutoff_end - self.cutoff_start
        dcut = np.pi / (2.0 * width)          # max |d/dz cos^2 ramp|
        ddcut = np.pi**2 / (2.0 * width**2)   # max |d^2/dz^2 cos^2 ramp|
        sum_abs_k = float(np.sum(np.abs(self.k)))
        sum_abs_w = float(np.sum(np.abs(self.w)))
        b_mu = a * n
        b_mu_t = a * sum_abs_w
        b_mu_z = a * sum_abs_k + b_mu * dcut
        b_mu_tt = a * float(np.sum(self.w**2))
        b_mu_zz = a * float(np.sum(self.k**2)) + 2.0 * a * sum_abs_k * dcut + b_mu * ddcut
        return FieldBounds(b_mu, b_mu_t, b_mu_z, b_mu_tt, b_mu_zz)

    @property
    def bound(self):
        return self.bounds.mu

    def _cutoff(self, z):
        c = np.ones_like(z)
        ramp = (z > self.cutoff_start) & (z < self.cutoff_end)
        if np.any(ramp):
            x = (z[ramp] - self.cutoff_start) / (self.cutoff_end - self.cutoff_start)
            c[ramp] = np.cos(0.5 * np.pi * x) ** 2
        c[z >= self.cutoff_end] = 0.0
        return c

    def _cutoff_dz(self, z):
        d = np.zeros_like(z)
        ramp = (z > self.cutoff_start) & (z < self.cutoff_end)
        if np.any(ramp):
            width = self.cutoff_end - self.cutoff_start
            x = (z[ramp] - self.cutoff_start) / width
            d[ramp] = -0.5 * np.pi / width * np.sin(np.pi * x)
        return d

    def _prep(self, t, z):
        t = np.asarray(t, dtype=float)
        z = np.asarray(z, dtype=float)
        t, z = np.broadcast_arrays(t, z)
        return t, np.maximum(z, 0.0)

    def _phases(self, t, z):
        # args shape (..., n_modes)
        return (np.multiply.outer(t, self.w)
                + np.multiply.outer(z, self.k)
                + self.phase)

    def mu(self, t, z):
        t, z = self._prep(t, z)
        if self.n_modes == 0:
            return np.zeros_like(t)
        raw = self.amplitude * np.cos(self._phases(t, z)).sum(axis=-1)
        return raw * self._cutoff(z)

    def mu_t(self, t, z):
        t, z = self._prep(t, z)
        if self.n_modes == 0:
            return np.zeros_like(t)
        raw = -self.amplitude * (np.sin(self._phases(t, z)) * self.w).sum(axis=-1)
        return raw * self._cutoff(z)

    def mu_z(self, t, z):
        t, z = self._prep(t, z)
        if self.n_modes == 0:
            return np.zeros_like(t)
        ph = self._phases(t, z)
        raw = -self.amplitude * (np.sin(ph) * self.k).sum(axis=-1)
        val = self.amplitude * np.cos(ph).sum(axis=-1)
        return raw * self._cutoff(z) + val * self._cutoff_dz(z)

    def eta(self, x):
        """Underlying one-argument process of a translational field (no cutoff)."""
        if self.kind != TRANSLATIONAL:
            raise SpecValidationError("eta(x) is only defined for translational fields")
        x = np.asarray(x, dtype=float)
        if self.n_modes == 0:
            return np.zeros_like(x)
        ph = np.multiply.outer(x, self.k) + self.phase
        return self.amplitude * np.cos(ph).sum(axis=-1)


def build_field(spec: MediumSpec) -> StationaryField:
    """Draw one field realization from the spec's autocorrelation.

    Deterministic given spec.seed.  n_modes = 0 is the zero-fluctuation
    sentinel: the returned field evaluates to 0 everywhere with zero bounds.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n = spec.n_modes
    if n == 0:
        empty = np.zeros(0)
        return StationaryField(empty, empty, empty, 0.0, spec.cutoff_start,
                               spec.cutoff_end, spec.seed, spec.autocorr.kind, spec.autocorr.v)
    if spec.autocorr.kind == TRANSLATIONAL:
        kappa = rng.normal(0.0, _SQRT_2PI, n)
        w = -spec.autocorr.v * kappa
        k = kappa
    else:
        w = rng.normal(0.0, _SQRT_2PI, n)
        k = rng.normal(0.0, _SQRT_2PI, n)
    phase = rng.uniform(0.0, 2.0 * np.pi, n)
    amplitude = np.sqrt(2.0 / n)
    return StationaryField(w, k, phase, amplitude, spec.cutoff_start,
                           spec.cutoff_end, spec.seed, spec.autocorr.kind, spec.autocorr.v)


def eval_mu(field: StationaryField, t, z):
    """Field value at scaled coordinates (total on finite inputs)."""
    return field.mu(t, z)


def eval_mu_t(field: StationaryField, t, z):
    """Partial derivative of mu in scaled time."""
    return field.mu_t(t, z)


def eval_mu_z(field: StationaryField, t, z):
    """Partial derivative of mu in scaled range (includes the cutoff ramp)."""
    return field.mu_z(t, z)


# ---------------------------------------------------------------------------
# Source pulse
# ---------------------------------------------------------------------------

PULSE_GABOR = "gabor"
PULSE_RAISED_COSINE = "raised-cosine-carrier"

CARRIER_FREQ = 2.0 * np.pi


@dataclass(frozen=True)
class Pulse:
    """Source profile f(s): compactly supported on [0, S], C^1, carrier 2*pi."""

    kind: str
    support: float

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        S = self.support
        inside = (s > 0.0) & (s < S)
        out = np.zeros_like(s)
        si = s[inside]
        carrier = np.cos(CARRIER_FREQ * (si - 0.5 * S))
        hann = np.sin(np.pi * si / S) ** 2
        if self.kind == PULSE_GABOR:
            sigma = S / 4.0
            envelope = np.exp(-0.5 * ((si - 0.5 * S) / sigma) ** 2) * hann
        else:
            envelope = hann
        out[inside] = carrier * envelope
        return out

    def spectrum(self, omega, n_quad=8192):
        """f_hat(omega) = integral of f(s) exp(i omega s) ds (trapezoid on [0, S])."""
        omega = np.asarray(omega, dtype=float)
        s = np.linspace(0.0, self.support, n_quad + 1)
        f = self(s)
        ds = s[1] - s[0]
        ker = np.exp(1j * np.multiply.outer(omega, s))
        w = np.full(n_quad + 1, ds)
        w[0] = w[-1] = 0.5 * ds
        return ker @ (f * w)


def make_pulse(kind: str, S: float) -> Pulse:
    """Build a pulse profile; S >= 2 keeps the spectrum away from the origin."""
    if kind not in (PULSE_GABOR, PULSE_RAISED_COSINE):
        raise SpecValidationError(f"unknown pulse kind {kind!r}")
    if S < 2.0:
        raise SpecValidationError(
            f"support S={S} too small: need S >= 2 carrier periods for a spectrum "
            "concentrated away from zero frequency"
        )
    return Pulse(kind, float(S))
