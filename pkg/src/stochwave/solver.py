"""Per-realization numerics.

Four solvers share this module:

* travel_time      -- quadrature of the random travel-time correction W_eps
* wavefront_integrate -- marches the simplified wave-front integral equation
* fdtd_run / decompose / extract_front -- staggered-grid acoustic solver and
  the front extraction in random travel-time coordinates
* oscillator_run   -- random harmonic oscillator energy growth

The wave-front kernel is evaluated through the field's harmonic modes: for a
finite cosine sum the (s, y) dependence of each mode separates, so one
operator application costs O(n_modes * n_s) instead of O(n_s^2) generic
evaluations.  A generic-evaluator cross check lives in the tests.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (GridResolutionError, InstabilityError,
                     PicardConvergenceError, ProbeRangeError,
                     SpecValidationError)
from .medium import (MediumSpec, Pulse, REGIME_FAST, REGIME_SLOW,
                     REGIME_TRANSLATIONAL, StationaryField)

RHO = 1.0   # constant density; zeta_o = rho * c_o


# ---------------------------------------------------------------------------
# Random travel time
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TravelTimeResult:
    """W_eps on a tau grid plus the characteristic time t_eps(c_o tau, s)."""

    tau: np.ndarray
    W: np.ndarray
    t: np.ndarray
    s: float
    regime: str


def _fine_tau_grid(tau_max, du):
    n = max(1, int(np.ceil(tau_max / du)))
    return tau_max / n, n


def _w_increments(field, spec, u_mid, du):
    """Midpoint-rule increments of W_eps over cells of width du."""
    eps, c = spec.epsilon, spec.c_o
    regime = spec.regime
    if regime == REGIME_TRANSLATIONAL:
        # leading-order form: W = (1/eps) int eta((c_o - v) u / eps^2) du
        x = (c - field.v) * u_mid / eps**2
        return (du / eps) * field.eta(x)
    mu = field.mu(u_mid / eps**spec.alpha, c * u_mid / eps**spec.beta)
    incr = (du / eps) * mu
    if regime == REGIME_FAST:
        incr -= du * mu * mu
    return incr


def _path_frequencies(field, spec):
    """Per-mode frequency of mu along the characteristic path u -> args(u)."""
    eps, c = spec.epsilon, spec.c_o
    if spec.regime == REGIME_TRANSLATIONAL:
        return field.k * (c - field.v) / eps**2
    return field.w / eps**spec.alpha + field.k * c / eps**spec.beta


def _w_closed_midpoint(field, spec, taus, du):
    """W_eps at cell boundaries via the closed form of the midpoint sum.

    For a harmonic mode, sum_{m<M} cos(Omega (m+1/2) du + phi) equals
    cos(phi + Omega M du / 2) sin(Omega M du / 2) / sin(Omega du / 2); this
    regroups the midpoint rule exactly (up to rounding), making mode-rich
    travel-time ensembles O(n_modes) per tau instead of O(n_modes * n_steps).
    Only valid when W_eps is linear in mu (slow / translational-leading).
    """
    eps = spec.epsilon
    omega = _path_frequencies(field, spec)
    phi = field.phase
    taus = np.asarray(taus, dtype=float)
    half = 0.5 * omega * du
    sin_half = np.sin(half)
    small = np.abs(sin_half) < 1e-12
    out = np.empty(taus.shape)
    for i, tau in enumerate(taus):
        m_cells = int(round(tau / du))
        big = 0.5 * omega * (m_cells * du)
        ratio = np.where(small, float(m_cells), np.sin(big) / np.where(small, 1.0, sin_half))
        q = np.cos(phi + big) * ratio
        out[i] = (du / eps) * field.amplitude * float(np.sum(q))
    return out


def travel_time(field: StationaryField, spec: MediumSpec, tau_grid, s: float = 0.0,
                du: Optional[float] = None, form: Optional[str] = None) -> TravelTimeResult:
    """Random travel-time correction W_eps(tau) for one realization.

    form='asymptotic' (default for slow/fast) integrates the regime's
    explicit quadrature by composite midpoint (step <= eps^2/10); the fast
    regime includes the -int mu^2 drift term.  form='exact' solves the
    implicit characteristic-time fixed point by Picard iteration per step;
    it is the default for translational media, where it reduces to the
    comoving-argument equation of that model.
    """
    tau_grid = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    if np.any(tau_grid < 0) or (tau_grid.size > 1 and np.any(np.diff(tau_grid) <= 0)):
        raise SpecValidationError("tau_grid must be nonnegative and increasing")
    eps, c = spec.epsilon, spec.c_o
    tau_max = float(tau_grid[-1]) if tau_grid.size else 0.0
    if tau_max == 0.0:
        z = np.zeros_like(tau_grid)
        return TravelTimeResult(tau_grid, z, tau_grid + eps**2 * s, s, spec.regime)
    if c * tau_max / eps**spec.beta > field.cutoff_start + 1e-9:
        raise SpecValidationError(
            f"tau_max={tau_max} reaches the truncation ramp: increase L beyond "
            f"{c * tau_max + 5 * eps**spec.beta:.3f}"
        )
    if form is None:
        form = "exact" if spec.regime == REGIME_TRANSLATIONAL else "asymptotic"
    if du is None:
        du = eps**2 / 10.0
    du, n = _fine_tau_grid(tau_max, min(du, eps**2 / 10.0))

    if form == "exact":
        fine = np.arange(n + 1) * du
        W_fine = _picard_travel_time(field, spec, fine, du, s)
        W = np.interp(tau_grid, fine, W_fine)
    elif spec.regime == REGIME_FAST or field.n_modes <= 256:
        fine = np.arange(n + 1) * du
        u_mid = (np.arange(n) + 0.5) * du
        W_fine = np.concatenate([[0.0], np.cumsum(_w_increments(field, spec, u_mid, du))])
        W = np.interp(tau_grid, fine, W_fine)
    else:
        # same midpoint rule, summed in closed form per mode
        lo = np.floor(tau_grid / du)
        t_lo, t_hi = lo * du, (lo + 1) * du
        w_pair = _w_closed_midpoint(field, spec, np.concatenate([t_lo, t_hi]), du)
        w_lo, w_hi = w_pair[:tau_grid.size], w_pair[tau_grid.size:]
        frac = np.clip((tau_grid - t_lo) / du, 0.0, 1.0)
        W = w_lo + frac * (w_hi - w_lo)
    t = tau_grid + eps**2 * (s + W)
    return TravelTimeResult(tau_grid, W, t, s, spec.regime)


def _picard_travel_time(field, spec, fine, du, s, tol=1e-10, max_iter=60):
    """March the implicit characteristic-time equation

        W(tau, s) = (1/eps) int_0^tau mu((u + eps^2 (s + W(u, s)))/eps^alpha,
                                         c_o u / eps^beta) du

    with a midpoint rule whose stage value solves a fixed point; s may be a
    scalar or a vector of window positions (characteristics marched jointly).
    The contraction factor is O(du eps^(1-alpha) |mu_t|), tiny for
    du <= eps^2/10.
    """
    eps, c = spec.epsilon, spec.c_o
    ta, tb = eps**spec.alpha, eps**spec.beta
    s = np.asarray(s, dtype=float)
    W = np.zeros((fine.size,) + s.shape)
    for m in range(fine.size - 1):
        u_mid = fine[m] + 0.5 * du
        z_arg = c * u_mid / tb
        w = W[m]
        for _ in range(max_iter):
            w_new = W[m] + (0.5 * du / eps) * field.mu(
                (u_mid + eps**2 * (s + w)) / ta, z_arg)
            if np.max(np.abs(w_new - w)) < tol:
                w = w_new
                break
            w = w_new
        else:
            raise PicardConvergenceError(float(np.max(np.abs(w_new - w))))
        W[m + 1] = W[m] + (du / eps) * field.mu(
            (u_mid + eps**2 * (s + w)) / ta, z_arg)
    return W


# ---------------------------------------------------------------------------
# Wave-front integral equation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WavefrontRecord:
    """Front samples a_eps(tau_k, s_j) and the travel-time trace of one run."""

    tau: np.ndarray
    s: np.ndarray
    a: np.ndarray            # (n_tau, n_s)
    W: np.ndarray            # (n_tau,)
    regime: str
    seed: int
    epsilon: float

    def at(self, tau):
        i = int(np.argmin(np.abs(self.tau - tau)))
        if not np.isclose(self.tau[i], tau, rtol=0, atol=1e-9):
            raise ValueError(f"tau={tau} not stored")
        return self.a[i]


def default_front_grid(pulse: Pulse, pad: float = 6.0, points_per_period: int = 32):
    dx = 1.0 / points_per_period
    n = int(round((pulse.support + pad) / dx))
    return np.arange(n) * dx


def _cumtrapz_rows(v, dy):
    out = np.cumsum(v, axis=-1)
    out -= 0.5 * (v + v[..., :1])
    out *= dy
    return out


class _ModeKernel:
    """Mode-separated evaluation of the double kernel of the front equation.

    mu+-(t, z) = eps^(2-beta) mu_z +- eps^(2-alpha) mu_t / c_o evaluated at

      t-arg: (tau' + eps^2 (x + W(tau'))) / eps^alpha   x = s (plus factor) or (y+s)/2
      z-arg: (c_o tau' + eps^2 c_o (s-y)/2) / eps^beta

    so each mode's phase is Theta_j(tau') + (linear in s) + (linear in y).
    """

    def __init__(self, field: StationaryField, spec: MediumSpec, s_grid):
        eps, c = spec.epsilon, spec.c_o
        e_a = eps ** (2.0 - spec.alpha)
        e_b = eps ** (2.0 - spec.beta)
        amp = field.amplitude
        w, k = field.w, field.k
        self.spec = spec
        self.field = field
        self.s = s_grid
        self.dy = s_grid[1] - s_grid[0]
        self.c_plus = amp * (e_b * k + e_a * w / c)
        self.c_minus = amp * (e_b * k - e_a * w / c)
        u_j = e_a * w                       # mu+ phase slope in s
        a_j = 0.5 * (e_a * w + e_b * c * k)  # mu- phase slope in s
        b_j = 0.5 * (e_a * w - e_b * c * k)  # mu- phase slope in y
        self.cp_cos_us = self.c_plus[:, None] * np.cos(np.outer(u_j, s_grid))
        self.cp_sin_us = self.c_plus[:, None] * np.sin(np.outer(u_j, s_grid))
        self.cos_as = np.cos(np.outer(a_j, s_grid))
        self.sin_as = np.sin(np.outer(a_j, s_grid))
        self.cos_by = np.cos(np.outer(b_j, s_grid))
        self.sin_by = np.sin(np.outer(b_j, s_grid))
        self.t_scale = 1.0 / eps**spec.alpha
        self.z_scale = c / eps**spec.beta
        self.eps2 = eps**2
        self.coeff = -c * c / 8.0

    def rhs(self, tau_p, W_tau, a):
        """d a / d tau at the stage (tau', W(tau')) for the current front a."""
        if self.field.n_modes == 0:
            return np.zeros_like(a)
        theta = (self.field.w * (tau_p + self.eps2 * W_tau) * self.t_scale
                 + self.field.k * tau_p * self.z_scale
                 + self.field.phase)
        cth = np.cos(theta)
        sth = np.sin(theta)
        mu_plus = -(sth @ self.cp_cos_us + cth @ self.cp_sin_us)
        cc = _cumtrapz_rows(self.cos_by * a, self.dy)
        ss = _cumtrapz_rows(self.sin_by * a, self.dy)
        # sin(th+As) CC + cos(th+As) SS = sth (cA CC - sA SS) + cth (sA CC + cA SS)
        x = self.cos_as * cc
        x -= self.sin_as * ss
        y = self.sin_as * cc
        y += self.cos_as * ss
        inner = -((self.c_minus * sth) @ x + (self.c_minus * cth) @ y)
        return self.coeff * (mu_plus * inner)


def wavefront_integrate(field: StationaryField, pulse: Pulse, spec: MediumSpec,
                        tau_max: float, s_grid=None, tau_checkpoints=None,
                        dtau: Optional[float] = None) -> WavefrontRecord:
    """March the simplified wave-front equation by midpoint RK2.

    The tau step resolves the eps^2-scale decorrelation of the kernel
    (default eps^2/10); W_eps is accumulated on the half-step grid with the
    same midpoint rule as travel_time, so stage values need no interpolation.
    """
    eps, c = spec.epsilon, spec.c_o
    if spec.regime not in (REGIME_SLOW, REGIME_FAST, REGIME_TRANSLATIONAL):
        raise SpecValidationError(f"unsupported regime {spec.regime!r}")
    if s_grid is None:
        s_grid = default_front_grid(pulse)
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid[1] - s_grid[0] > 1.0 / 32.0 + 1e-15:
        raise GridResolutionError("front grid needs >= 32 points per carrier period")
    if c * tau_max / eps**spec.beta > field.cutoff_start + 1e-9:
        raise SpecValidationError(
            f"tau_max={tau_max} reaches the truncation ramp: increase L")
    if tau_checkpoints is None:
        tau_checkpoints = np.linspace(0.0, tau_max, 6)
    tau_checkpoints = np.atleast_1d(np.asarray(tau_checkpoints, dtype=float))

    if dtau is None:
        dtau = eps**2 / 10.0
    n_steps = max(1, int(np.ceil(tau_max / dtau)))
    dtau = tau_max / n_steps
    h2 = 0.5 * dtau

    # characteristic-time trace on the half-step grid (cells of width h2);
    # the exact fixed-point form keeps the front frame aligned with the
    # acoustic solver's extraction at finite eps
    half_grid = np.arange(2 * n_steps + 1) * h2
    W_half = _picard_travel_time(field, spec, half_grid, h2, 0.0)

    kern = _ModeKernel(field, spec, s_grid)
    a = pulse(s_grid)
    norm0 = np.linalg.norm(a)
    chk_steps = np.round(tau_checkpoints / dtau).astype(int)
    if np.any(chk_steps < 0) or np.any(chk_steps > n_steps):
        raise SpecValidationError("tau_checkpoints must lie within [0, tau_max]")
    stored = {}
    if 0 in chk_steps:
        stored[0] = a.copy()
    check_every = max(1, min(25, n_steps // 4))
    for n in range(n_steps):
        k1 = kern.rhs(n * dtau, W_half[2 * n], a)
        k2 = kern.rhs(n * dtau + h2, W_half[2 * n + 1], a + h2 * k1)
        a = a + dtau * k2
        if (n + 1) % check_every == 0 or n + 1 == n_steps:
            norm = np.linalg.norm(a)
            if not np.isfinite(norm) or norm > 10.0 * max(norm0, 1e-300):
                raise InstabilityError(f"front norm exceeded 10x pulse norm at step {n + 1}")
        if (n + 1) in chk_steps:
            stored[n + 1] = a.copy()
    taus = chk_steps * dtau
    a_out = np.array([stored[m] for m in chk_steps])
    W_out = W_half[2 * chk_steps]
    return WavefrontRecord(taus, s_grid, a_out, W_out, spec.regime, field.seed, eps)


# ---------------------------------------------------------------------------
# Staggered-grid acoustic solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Staggered space-time grid; p lives on integer nodes, u on half nodes."""

    dz: float
    dt: float
    z_min: float
    z_max: float
    t_max: float
    c_max: float
    cfl: float

    def __post_init__(self):
        if self.c_max * self.dt / self.dz > 0.9 + 1e-12:
            raise GridResolutionError(
                f"CFL {self.c_max * self.dt / self.dz:.3f} exceeds 0.9")

    @property
    def z_nodes(self):
        n = int(round((self.z_max - self.z_min) / self.dz))
        return self.z_min + np.arange(n + 1) * self.dz

    @property
    def n_steps(self):
        return int(np.ceil(self.t_max / self.dt))


def build_grid(spec: MediumSpec, field: StationaryField, pulse: Pulse,
               tau_max: float, points_per_wavelength: int = 60, cfl: float = 0.9,
               s_window: float = 24.0) -> Grid:
    """Size the FDTD grid for front observation up to tau_max.

    The left pad holds the launch profile and keeps boundary re-reflections
    causally clear of every front window; c_max comes from the realized
    fluctuation maximum over a sampled lattice (checked again during the run).
    """
    eps, c, S = spec.epsilon, spec.c_o, pulse.support
    wavelength = c * eps**2
    dz = wavelength / points_per_wavelength
    if dz > eps**2 * S / 20.0:
        raise GridResolutionError("fewer than 20 points per pulse support")
    z_left = -(c * eps**2 * (S + s_window + 10.0))
    t_max = tau_max + eps**2 * (s_window + S + 10.0)
    z_right = c * tau_max + abs(z_left)
    mu_hi = _realized_mu_max(field, spec, t_max, z_right)
    if eps * mu_hi >= 0.95:
        raise SpecValidationError(
            f"impedance near singular: eps * max|mu| = {eps * mu_hi:.2f}")
    c_max = c / (1.0 - eps * mu_hi)
    dt = cfl * dz / c_max
    return Grid(dz, dt, z_left, z_right, t_max, c_max, cfl)


def _realized_mu_max(field, spec, t_max, z_max, margin=1.2):
    if field.n_modes == 0:
        return 0.0
    ts = np.linspace(0.0, t_max / spec.epsilon**spec.alpha, 64)
    zs = np.linspace(0.0, z_max / spec.epsilon**spec.beta, 512)
    sample = np.abs(field.mu(ts[:, None], zs[None, :])).max()
    return min(margin * float(sample) + 0.2, field.bound)


@dataclass(frozen=True)
class FieldState:
    """One decimated snapshot of the (p, u) fields."""

    p: np.ndarray
    u: np.ndarray
    time_index: int


@dataclass(frozen=True)
class FdtdHistory:
    grid: Grid
    t: np.ndarray
    probe_z: np.ndarray
    probe_p: np.ndarray       # (n_t, n_probes) at full steps
    probe_u: np.ndarray       # (n_t, n_probes) colocated by averaging
    snapshots: tuple
    epsilon: float
    seed: int


def medium_factor(field: StationaryField, spec: MediumSpec) -> Callable:
    """g(t, z) = 1 + eps * mu(t / eps^alpha, z / eps^beta) for z > 0, else 1."""
    eps = spec.epsilon

    def g(t, z):
        z = np.asarray(z, dtype=float)
        out = np.ones_like(z, dtype=float)
        mask = z > 0.0
        if np.any(mask):
            out[mask] = 1.0 + eps * field.mu(t / eps**spec.alpha, z[mask] / eps**spec.beta)
        return out

    return g


def frozen_medium_factor(field: StationaryField, spec: MediumSpec, t_freeze: float = 0.0) -> Callable:
    """Medium factor with time frozen (the alpha -> infinity limit)."""
    eps = spec.epsilon

    def g(t, z):
        return medium_factor(field, spec)(t_freeze * eps**spec.alpha, z)

    return g


class _FastMedium:
    """Per-step medium factor on the fixed z row, via mode phase rotation."""

    def __init__(self, field, spec, z_nodes):
        self.eps = spec.epsilon
        self.t_scale = 1.0 / spec.epsilon**spec.alpha
        self.field = field
        mask = z_nodes > 0.0
        self.mask = mask
        if field.n_modes:
            zs = z_nodes[mask] / spec.epsilon**spec.beta
            ph = np.outer(field.k, zs) + field.phase[:, None]
            self.cz = np.cos(ph)
            self.sz = np.sin(ph)
            self.cut = field._cutoff(zs)

    def __call__(self, t, out):
        out.fill(1.0)
        if self.field.n_modes == 0:
            return out
        wt = self.field.w * (t * self.t_scale)
        cwt = np.cos(wt)
        swt = np.sin(wt)
        mu = self.field.amplitude * (cwt @ self.cz - swt @ self.sz) * self.cut
        out[self.mask] += self.eps * mu
        return out


def fdtd_run(field: StationaryField, pulse: Pulse, spec: MediumSpec, grid: Grid,
             probe_z: Sequence[float] = (), medium_fn: Optional[Callable] = None,
             snap_every: Optional[int] = None) -> FdtdHistory:
    """Leapfrog integration of the first-order acoustic system.

    p sits on integer nodes and full steps, u on half nodes and half steps;
    the compressibility 1/K(t, z) is evaluated at the half-step time.  The
    pulse enters as an exact right-mover initial condition in the homogeneous
    region z < 0; both edges are pressure-release and the domain is sized so
    edge reflections never reach a probe window in time.
    """
    eps, c, S = spec.epsilon, spec.c_o, pulse.support
    zeta_o = RHO * c
    z = grid.z_nodes
    dz, dt = grid.dz, grid.dt
    nt = grid.n_steps
    n_nodes = z.size

    # exact right-mover: A(t, z) = f((t - z/c)/eps^2), B = 0 in the reference medium
    def right_mover(t_val, zz):
        return pulse((t_val - zz / c) / eps**2)

    p = 0.5 * np.sqrt(zeta_o) * right_mover(0.0, z)
    z_half = z[:-1] + 0.5 * dz
    u = 0.5 / np.sqrt(zeta_o) * right_mover(0.5 * dt, z_half)

    probe_z = np.asarray(list(probe_z), dtype=float)
    probe_idx = np.round((probe_z - grid.z_min) / dz).astype(int)
    if np.any(probe_idx < 1) or np.any(probe_idx > n_nodes - 2):
        raise ProbeRangeError("probe beyond simulated domain")
    probe_loc = z[probe_idx]

    if medium_fn is None:
        g_row = _FastMedium(field, spec, z[1:-1])
        g_buf = np.empty(n_nodes - 2)
    else:
        g_row = None

    times = np.arange(nt + 1) * dt
    probe_p = np.empty((nt + 1, probe_idx.size))
    probe_uh = np.empty((nt + 1, probe_idx.size))   # spatial average at half steps
    snaps = []
    inv_rho_dzdt = dt / (RHO * dz)
    c2dt = c * c * dt / dz
    g_floor = c / grid.c_max   # smallest medium factor the CFL bound allows

    for n in range(nt + 1):
        probe_p[n] = p[probe_idx]
        probe_uh[n] = 0.5 * (u[probe_idx - 1] + u[probe_idx])
        if snap_every and n % snap_every == 0:
            snaps.append(FieldState(p.copy(), u.copy(), n))
        if n == nt:
            break
        t_half = (n + 0.5) * dt
        if g_row is not None:
            g = g_row(t_half, g_buf)
        else:
            g = medium_fn(t_half, z[1:-1])
        gm = g.min()
        if gm < g_floor - 1e-9:
            raise InstabilityError(
                f"medium factor {gm:.3f} fell below the CFL bound {g_floor:.3f}; rebuild grid")
        if not np.isfinite(p).all():
            raise InstabilityError(f"NaN in pressure field at step {n}")
        # p_t = -K u_z with K = rho c^2 / g^2, then u_t = -p_z / rho
        p[1:-1] -= (c2dt / (g * g)) * (u[1:] - u[:-1])
        p[0] = 0.0
        p[-1] = 0.0
        u -= inv_rho_dzdt * (p[1:] - p[:-1])

    probe_u = np.empty_like(probe_p)
    probe_u[0] = probe_uh[0]
    probe_u[1:] = 0.5 * (probe_uh[:-1] + probe_uh[1:])
    return FdtdHistory(grid, times, probe_loc, probe_p, probe_u, tuple(snaps),
                       eps, field.seed)


def _impedance_rows(field, spec, t, z):
    """zeta_eps(t, z) = zeta_o / (1 + eps mu) for z > 0, else zeta_o."""
    eps = spec.epsilon
    out = np.full(t.shape, RHO * spec.c_o)
    mask = z > 0.0
    if np.any(mask):
        mu = field.mu(t[mask] / eps**spec.alpha, z[mask] / eps**spec.beta)
        out[mask] = RHO * spec.c_o / (1.0 + eps * mu)
    return out


def decompose(p, u, t, z, field: StationaryField, spec: MediumSpec):
    """Right/left going waves A, B from (p, u) at coordinates (t, z)."""
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    t, z = np.broadcast_arrays(np.atleast_1d(t), np.atleast_1d(z))
    zeta = _impedance_rows(field, spec, t, z)
    rz = np.sqrt(zeta)
    A = p / rz + rz * u
    B = -p / rz + rz * u
    return A, B


def reconstruct(A, B, t, z, field: StationaryField, spec: MediumSpec):
    """Inverse of decompose: (p, u) from the wave amplitudes."""
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    t, z = np.broadcast_arrays(np.atleast_1d(t), np.atleast_1d(z))
    zeta = _impedance_rows(field, spec, t, z)
    rz = np.sqrt(zeta)
    p = 0.5 * rz * (A - B)
    u = 0.5 * (A + B) / rz
    return p, u


def extract_front(history: FdtdHistory, field: StationaryField, spec: MediumSpec,
                  pulse: Pulse, s_grid=None, taus=None) -> WavefrontRecord:
    """Sample the right-going wave at the random travel time of each probe.

    a_eps(tau_k, s_j) = A(t_eps(c_o tau_k, s_j), z_k) with A interpolated
    linearly in time at the probe range z_k = c_o tau_k.
    """
    eps, c = spec.epsilon, spec.c_o
    if s_grid is None:
        s_grid = default_front_grid(pulse)
    s_grid = np.asarray(s_grid, dtype=float)
    if taus is None:
        taus = history.probe_z / c
    taus = np.asarray(taus, dtype=float)
    # snap each requested tau to the probe actually recorded: a probe offset
    # of dz/2 already shifts the front window by dz/(2 c eps^2) in s
    idx = [int(np.argmin(np.abs(history.probe_z - c * tau))) for tau in taus]
    for tau, j in zip(taus, idx):
        if abs(history.probe_z[j] - c * tau) > history.grid.dz:
            raise ProbeRangeError(f"no probe recorded at z = {c * tau}")
    taus_eff = history.probe_z[np.asarray(idx)] / c
    W_win = characteristic_window(field, spec, taus_eff, s_grid)
    a = np.empty((taus.size, s_grid.size))
    for i, (tau, j) in enumerate(zip(taus_eff, idx)):
        t_eval = tau + eps**2 * (s_grid + W_win[i])
        if t_eval[-1] > history.t[-1]:
            raise ProbeRangeError("front window extends beyond simulated time")
        refl_clear = (2.0 * abs(history.grid.z_min) + c * tau) / c
        if t_eval[-1] > refl_clear:
            raise ProbeRangeError("front window contaminated by edge reflection")
        A, _ = decompose(history.probe_p[:, j], history.probe_u[:, j],
                         history.t, history.probe_z[j], field, spec)
        a[i] = np.interp(t_eval, history.t, A)
    return WavefrontRecord(taus_eff, s_grid, a, W_win[:, 0],
                           spec.regime, field.seed, eps)


def characteristic_window(field: StationaryField, spec: MediumSpec, taus, s_grid,
                          du: Optional[float] = None) -> np.ndarray:
    """True travel-time corrections W_eps(tau_i, s_j) across a front window.

    Marches one characteristic per window position s_j (eq. of the random
    travel time, solved jointly by the vectorized Picard stepper); the
    s-dependence matters at moderate eps where the asymptotically vanishing
    window warp is still visible.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    eps = spec.epsilon
    tau_max = float(np.max(taus))
    if tau_max == 0.0:
        return np.zeros((taus.size, np.asarray(s_grid).size))
    if du is None:
        du = eps**2 / 10.0
    du, n = _fine_tau_grid(tau_max, min(du, eps**2 / 10.0))
    fine = np.arange(n + 1) * du
    W = _picard_travel_time(field, spec, fine, du, np.asarray(s_grid, dtype=float))
    out = np.empty((taus.size, np.asarray(s_grid).size))
    for i, tau in enumerate(taus):
        frac = tau / du
        m = min(int(frac), n - 1)
        out[i] = W[m] + (frac - m) * (W[m + 1] - W[m])
    return out


# ---------------------------------------------------------------------------
# Random harmonic oscillator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OscillatorRun:
    Z: np.ndarray
    energy: np.ndarray        # (n_runs, n_rec) spec-normalized energy
    lyapunov: np.ndarray      # (n_runs,) fitted growth rate of sqrt(energy)
    omega: float
    epsilon: float
    fit_window: tuple


def oscillator_batch(fields, omega: float, epsilon: float, Z_max: float,
                     c_o: float = 1.0, steps_per_osc: int = 64,
                     fit_fraction: float = 0.5, store_every: int = 32) -> OscillatorRun:
    """RK4 integration of u'' + (omega^2/eps^4 c_o^2)[1 + eps mu~] u = 0.

    Works in the stretched variable xi = Z / (c_o eps^2) where the equation
    reads u_xixi + omega^2 (1 + eps mu~(xi)) u = 0; all realizations advance
    in lockstep so the arithmetic matches a single run exactly.
    """
    if steps_per_osc < 50:
        raise GridResolutionError("need at least 50 steps per oscillation")
    if omega <= 0:
        raise SpecValidationError("omega must be positive")
    xi_max = Z_max / (c_o * epsilon**2)
    h = 2.0 * np.pi / (omega * steps_per_osc)
    n = int(np.ceil(xi_max / h))
    h = xi_max / n
    R = len(fields)

    # mu~ from the field's time slice: 1 + eps mu~ = (1 + eps mu(., 0))^(-2)
    xi_half = 0.5 * h * np.arange(2 * n + 1)
    mu_t = np.empty((R, xi_half.size))
    chunk = max(1024, int(4e6 // max(1, fields[0].n_modes)))
    for r, fld in enumerate(fields):
        for i in range(0, xi_half.size, chunk):
            mu_t[r, i:i + chunk] = fld.mu(xi_half[i:i + chunk], 0.0)
    q = omega**2 * (1.0 + epsilon * (((1.0 + epsilon * mu_t) ** -2 - 1.0) / epsilon))

    zeta_o = RHO * c_o
    uhat = np.full(R, 0.5 / np.sqrt(zeta_o), dtype=complex)
    du = np.full(R, -0.5j * omega * epsilon**2 / np.sqrt(zeta_o), dtype=complex)

    n_rec = n // store_every + 1
    energy = np.empty((R, n_rec))
    Z_rec = np.empty(n_rec)
    norm = 1.0 / (c_o**2 * epsilon**4)

    def record(i_rec, m):
        energy[:, i_rec] = norm * (omega**2 * np.abs(uhat) ** 2 + np.abs(du) ** 2)
        Z_rec[i_rec] = m * h * c_o * epsilon**2

    i_rec = 0
    record(i_rec, 0)
    for m in range(n):
        q0 = q[:, 2 * m]
        qh = q[:, 2 * m + 1]
        q1 = q[:, 2 * m + 2]
        k1u, k1v = du, -q0 * uhat
        u2 = uhat + 0.5 * h * k1u
        k2u, k2v = du + 0.5 * h * k1v, -qh * u2
        u3 = uhat + 0.5 * h * k2u
        k3u, k3v = du + 0.5 * h * k2v, -qh * u3
        u4 = uhat + h * k3u
        k4u, k4v = du + h * k3v, -q1 * u4
        uhat = uhat + (h / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u)
        du = du + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        if (m + 1) % store_every == 0:
            i_rec += 1
            record(i_rec, m + 1)
    Z_rec = Z_rec[:i_rec + 1]
    energy = energy[:, :i_rec + 1]

    lo = fit_fraction * Z_max
    sel = Z_rec >= lo
    x = Z_rec[sel]
    y = 0.5 * np.log(energy[:, sel])
    xm = x - x.mean()
    denom = np.sum(xm * xm)
    slopes = (y - y.mean(axis=1, keepdims=True)) @ xm / denom
    return OscillatorRun(Z_rec, energy, slopes, omega, epsilon, (float(lo), float(Z_max)))


def oscillator_run(field: StationaryField, omega: float, epsilon: float, Z_max: float,
                   c_o: float = 1.0, steps_per_osc: int = 64,
                   fit_fraction: float = 0.5, store_every: int = 32) -> OscillatorRun:
    """Single-realization oscillator run (energy trace plus Lyapunov estimate)."""
    return oscillator_batch([field], omega, epsilon, Z_max, c_o, steps_per_osc,
                            fit_fraction, store_every)
