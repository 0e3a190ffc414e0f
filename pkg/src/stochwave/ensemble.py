"""Monte Carlo orchestration: seed ensembles, streaming statistics, theory comparison.

Realization i of an ensemble uses seed base_seed + i.  Records are reduced in
seed order with a streaming Welford accumulator, so serial and parallel runs
produce bitwise-identical statistics.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.stats import kstest

from .errors import SpecValidationError
from .medium import MediumSpec, Pulse, build_field
from .solver import (build_grid, default_front_grid, extract_front,
                     fdtd_run, oscillator_batch, travel_time,
                     wavefront_integrate)
from .theory import KernelTable, LimitFront

SOLVER_WAVEFRONT = "wavefront-integrator"
SOLVER_FDTD = "fdtd+extract"


class _Welford:
    """Streaming mean/variance with per-element compensated updates."""

    def __init__(self, shape):
        self.n = 0
        self.mean = np.zeros(shape)
        self.m2 = np.zeros(shape)

    def add(self, x):
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    def variance(self):
        if self.n < 2:
            return np.zeros_like(self.mean)
        return self.m2 / (self.n - 1)


@dataclass(frozen=True)
class EnsembleStats:
    """Pointwise moments of fronts and travel times across realizations."""

    tau: np.ndarray
    s: np.ndarray
    mean_a: np.ndarray        # (n_tau, n_s)
    var_a: np.ndarray
    mean_W: np.ndarray        # (n_tau,)
    var_W: np.ndarray
    n: int
    regime: str
    epsilon: float
    base_seed: int
    solver: str
    fronts: Optional[np.ndarray] = None     # (n, n_tau, n_s) when retained
    W_samples: Optional[np.ndarray] = None  # (n, n_tau)


def _resolve_workers(workers):
    if workers in (0, None):
        env = os.environ.get("STOCHWAVE_WORKERS")
        if env:
            workers = int(env)
        else:
            workers = min(os.cpu_count() or 1, 8)
    return max(1, int(workers))


def _wavefront_worker(args):
    spec, pulse, tau_max, tau_checkpoints, s_grid, dtau = args
    try:
        field = build_field(spec)
        return wavefront_integrate(field, pulse, spec, tau_max,
                                   s_grid=s_grid, tau_checkpoints=tau_checkpoints,
                                   dtau=dtau)
    except Exception as exc:
        raise RuntimeError(f"realization with seed {spec.seed} failed: {exc}") from exc


def _fdtd_worker(args):
    spec, pulse, tau_max, tau_checkpoints, s_grid, ppw = args
    try:
        field = build_field(spec)
        grid = build_grid(spec, field, pulse, tau_max, points_per_wavelength=ppw)
        probes = [spec.c_o * t for t in np.atleast_1d(tau_checkpoints) if t > 0]
        hist = fdtd_run(field, pulse, spec, grid, probe_z=probes)
        taus = [t for t in np.atleast_1d(tau_checkpoints) if t > 0]
        return extract_front(hist, field, spec, pulse, s_grid=s_grid, taus=taus)
    except Exception as exc:
        raise RuntimeError(f"realization with seed {spec.seed} failed: {exc}") from exc


def _run_records(worker, payloads, workers):
    if workers <= 1:
        return [worker(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, payloads, chunksize=max(1, len(payloads) // (4 * workers))))


def run_ensemble(spec: MediumSpec, pulse: Pulse, solver_choice: str, n: int,
                 base_seed: int, tau_max: float, tau_checkpoints=None,
                 s_grid=None, dtau=None, workers: int = 1, retain: bool = False,
                 points_per_wavelength: int = 100) -> EnsembleStats:
    """Front ensemble over seeds base_seed + i, reduced in seed order."""
    if n < 1:
        raise SpecValidationError("ensemble size must be >= 1")
    if solver_choice not in (SOLVER_WAVEFRONT, SOLVER_FDTD):
        raise SpecValidationError(f"unknown solver choice {solver_choice!r}")
    if s_grid is None:
        s_grid = default_front_grid(pulse)
    if tau_checkpoints is None:
        tau_checkpoints = np.linspace(0.0, tau_max, 6)
    tau_checkpoints = np.atleast_1d(np.asarray(tau_checkpoints, dtype=float))

    if solver_choice == SOLVER_WAVEFRONT:
        payloads = [(replace(spec, seed=base_seed + i), pulse, tau_max,
                     tau_checkpoints, s_grid, dtau) for i in range(n)]
        worker = _wavefront_worker
    else:
        payloads = [(replace(spec, seed=base_seed + i), pulse, tau_max,
                     tau_checkpoints, s_grid, points_per_wavelength) for i in range(n)]
        worker = _fdtd_worker
    records = _run_records(worker, payloads, _resolve_workers(workers) if workers != 1 else 1)

    tau = records[0].tau
    acc_a = _Welford((tau.size, s_grid.size))
    acc_w = _Welford(tau.size)
    fronts = np.empty((n, tau.size, s_grid.size)) if retain else None
    w_samples = np.empty((n, tau.size))
    for i, rec in enumerate(records):
        acc_a.add(rec.a)
        acc_w.add(rec.W)
        w_samples[i] = rec.W
        if retain:
            fronts[i] = rec.a
    return EnsembleStats(tau, np.asarray(s_grid, dtype=float), acc_a.mean,
                         acc_a.variance(), acc_w.mean, acc_w.variance(), n,
                         spec.regime, spec.epsilon, base_seed, solver_choice,
                         fronts, w_samples)


def _travel_worker(args):
    spec, tau_grid, du, form = args
    field = build_field(spec)
    return travel_time(field, spec, tau_grid, du=du, form=form).W


def run_travel_time_ensemble(spec: MediumSpec, tau_grid, n: int, base_seed: int,
                             du=None, form=None, workers: int = 1) -> EnsembleStats:
    """Travel-time-only ensemble (W_eps statistics; no fronts)."""
    if n < 1:
        raise SpecValidationError("ensemble size must be >= 1")
    tau_grid = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    payloads = [(replace(spec, seed=base_seed + i), tau_grid, du, form) for i in range(n)]
    ws = _run_records(_travel_worker, payloads, _resolve_workers(workers) if workers != 1 else 1)
    acc = _Welford(tau_grid.size)
    samples = np.empty((n, tau_grid.size))
    for i, w in enumerate(ws):
        acc.add(w)
        samples[i] = w
    empty = np.zeros((tau_grid.size, 0))
    return EnsembleStats(tau_grid, np.zeros(0), empty, empty, acc.mean,
                         acc.variance(), n, spec.regime, spec.epsilon,
                         base_seed, "travel-time", None, samples)


def run_oscillator_ensemble(spec: MediumSpec, omega: float, n: int, base_seed: int,
                            Z_max: float = 12.0, steps_per_osc: int = 50):
    """Oscillator Lyapunov ensemble; all realizations advance in lockstep."""
    fields = [build_field(replace(spec, seed=base_seed + i)) for i in range(n)]
    return oscillator_batch(fields, omega, spec.epsilon, Z_max, spec.c_o,
                            steps_per_osc=steps_per_osc)


# ---------------------------------------------------------------------------
# Comparison against the limit theory
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    """Quantitative comparison of an ensemble with the limit-theory objects."""

    tau: np.ndarray
    front_error: np.ndarray          # ||mean a - abar||_2 / ||abar||_2 per tau
    variance_slope: float
    variance_slope_stderr: float
    drift: float
    drift_stderr: float
    ks_statistic: float
    ks_pvalue: float
    spectral_band: tuple             # (omega_lo, omega_hi)
    spectral_max_rel_dev: float      # amplitude-ratio deviation over the band
    mean_front_energy: float         # average of per-realization front energies
    theory_front_energy: float
    pulse_energy: float
    D_squared: float
    h: float
    n: int
    epsilon: float
    regime: str
    passed: dict

    def all_passed(self):
        return all(self.passed.values())


def _least_squares_slope(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope = coef[0]
    if x.size > 2:
        resid = y - A @ coef
        s2 = float(resid @ resid) / (x.size - 2)
        cov = s2 * np.linalg.inv(A.T @ A)
        return slope, float(np.sqrt(cov[0, 0]))
    return slope, float("nan")


def _spectrum_on_grid(values, ds):
    n = values.size
    n_fft = 1
    while n_fft < 2 * n:
        n_fft *= 2
    fhat = ds * n_fft * np.fft.ifft(values, n_fft)
    omega = 2.0 * np.pi * np.fft.fftfreq(n_fft, d=ds)
    return omega, fhat


def compare(stats: EnsembleStats, front: Optional[LimitFront], table: KernelTable,
            pulse: Pulse, travel_stats: Optional[EnsembleStats] = None,
            band_floor: float = 0.1, thresholds: Optional[dict] = None) -> ComparisonReport:
    """Front error, travel-time regression, KS Gaussianity, spectral ratio.

    The spectral check compares the amplitude ratio |mean-front hat / f hat|
    with exp(-c_o tau omega^2 gamma_c(omega)) over the pulse band (where the
    pulse spectrum exceeds band_floor of its peak).
    """
    ts = travel_stats if travel_stats is not None else stats
    # front error per tau against the aligned theory front
    if front is not None and stats.s.size:
        if stats.s.size != front.s.size or np.max(np.abs(stats.s - front.s)) > 1e-9:
            raise SpecValidationError("ensemble and theory s grids are not aligned")
        front_error = np.empty(stats.tau.size)
        for i, tau in enumerate(stats.tau):
            ref = front.at(tau) if np.min(np.abs(front.tau - tau)) < 1e-9 else None
            if ref is None:
                front_error[i] = np.nan
                continue
            denom = np.linalg.norm(ref)
            front_error[i] = np.linalg.norm(stats.mean_a[i] - ref) / denom if denom else 0.0
    else:
        front_error = np.full(stats.tau.size, np.nan)

    # travel-time diffusion and drift
    live = ts.tau > 0
    if np.count_nonzero(live) >= 2:
        slope, slope_se = _least_squares_slope(ts.tau[live], ts.var_W[live])
    else:
        slope, slope_se = float("nan"), float("nan")
    i_last = int(np.argmax(ts.tau))
    tau_last = ts.tau[i_last]
    if tau_last > 0:
        drift = float(ts.mean_W[i_last] / tau_last)
        drift_se = float(np.sqrt(ts.var_W[i_last] / ts.n) / tau_last)
    else:
        drift, drift_se = float("nan"), float("nan")

    # KS Gaussianity of standardized W at the final tau
    if ts.W_samples is not None and tau_last > 0 and ts.n >= 3:
        w = ts.W_samples[:, i_last]
        sd = w.std(ddof=1)
        ks = kstest((w - w.mean()) / sd, "norm") if sd > 0 else None
        ks_stat, ks_p = (float(ks.statistic), float(ks.pvalue)) if ks else (0.0, 1.0)
    else:
        ks_stat, ks_p = float("nan"), float("nan")

    # spectral amplitude-ratio check at the final front checkpoint
    spectral_dev = float("nan")
    band = (float("nan"), float("nan"))
    mean_energy = theory_energy = pulse_energy = float("nan")
    if stats.s.size:
        ds = stats.s[1] - stats.s[0]
        i_tau = int(np.argmax(stats.tau))
        tau_f = stats.tau[i_tau]
        f_samp = pulse(stats.s)
        omega, fhat = _spectrum_on_grid(f_samp, ds)
        _, ahat = _spectrum_on_grid(stats.mean_a[i_tau], ds)
        pos = omega > 0
        mask = pos & (np.abs(fhat) >= band_floor * np.abs(fhat).max())
        if np.any(mask) and tau_f > 0:
            ratio = np.abs(ahat[mask]) / np.abs(fhat[mask])
            target = np.exp(-table.c_o * tau_f * omega[mask] ** 2
                            * table.kernel.gamma_c(omega[mask]))
            spectral_dev = float(np.max(np.abs(ratio / target - 1.0)))
            band = (float(np.min(omega[mask])), float(np.max(omega[mask])))
        pulse_energy = float(np.sum(f_samp**2) * ds)
        # E[int a^2] estimated from the first two moments
        mean_energy = float(np.sum(stats.mean_a[i_tau] ** 2
                                   + stats.var_a[i_tau] * (stats.n - 1) / max(stats.n, 1)) * ds)
        if front is not None and np.min(np.abs(front.tau - tau_f)) < 1e-9:
            theory_energy = float(np.sum(front.at(tau_f) ** 2) * ds)

    passed = {}
    if thresholds:
        if "front_error" in thresholds:
            passed["front_error"] = bool(np.nanmax(front_error) <= thresholds["front_error"])
        if "variance_slope_rel" in thresholds:
            passed["variance_slope"] = bool(
                abs(slope - table.D**2) <= thresholds["variance_slope_rel"] * table.D**2)
        if "drift_abs" in thresholds:
            passed["drift"] = bool(abs(drift - table.h) <= thresholds["drift_abs"])
        if "ks_alpha" in thresholds:
            passed["ks"] = bool(ks_p >= thresholds["ks_alpha"])
        if "spectral_rel" in thresholds:
            passed["spectral"] = bool(spectral_dev <= thresholds["spectral_rel"])
        if thresholds.get("energy_gain"):
            passed["energy_gain"] = bool(mean_energy > pulse_energy)

    return ComparisonReport(stats.tau, front_error, float(slope), slope_se,
                            drift, drift_se, ks_stat, ks_p, band, spectral_dev,
                            mean_energy, theory_energy, pulse_energy,
                            float(table.D**2), float(table.h), ts.n,
                            stats.epsilon, stats.regime, passed)


@dataclass(frozen=True)
class ConvergenceRow:
    epsilon: float
    front_error: float
    error_bar: float
    n: int


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple
    tau: float
    fitted_exponent: float
    r_squared: float

    def errors(self):
        return np.array([r.front_error for r in self.rows])


def convergence_study(spec: MediumSpec, pulse: Pulse, eps_list: Sequence[float],
                      n: int, tau: float, base_seed: int, front_builder,
                      s_grid=None, workers: int = 1, n_blocks: int = 10) -> ConvergenceTable:
    """Front error vs epsilon using the wave-front integrator.

    front_builder(s_grid, tau) must return the limit front values on the
    grid.  Error bars come from a delete-one-block jackknife over the
    retained fronts; the fitted error exponent is reported as a diagnostic
    (no rate is asserted).
    """
    eps_list = list(eps_list)
    if len(eps_list) > 1 and np.any(np.diff(eps_list) >= 0):
        raise SpecValidationError("eps_list must be strictly decreasing")
    if s_grid is None:
        s_grid = default_front_grid(pulse)
    ref = front_builder(s_grid, tau)
    ref_norm = np.linalg.norm(ref)
    rows = []
    for k, eps in enumerate(eps_list):
        spec_e = replace(spec, epsilon=float(eps))
        stats = run_ensemble(spec_e, pulse, SOLVER_WAVEFRONT, n,
                             base_seed + 10000 * k, tau, tau_checkpoints=[tau],
                             s_grid=s_grid, workers=workers, retain=True)
        err = np.linalg.norm(stats.mean_a[0] - ref) / ref_norm
        blocks = np.array_split(stats.fronts[:, 0, :], min(n_blocks, n))
        if len(blocks) > 1:
            jack = []
            for b in range(len(blocks)):
                rest = np.concatenate([blocks[j] for j in range(len(blocks)) if j != b])
                jack.append(np.linalg.norm(rest.mean(axis=0) - ref) / ref_norm)
            jack = np.array(jack)
            nb = len(blocks)
            bar = float(np.sqrt((nb - 1) / nb * np.sum((jack - jack.mean()) ** 2)))
        else:
            bar = float("nan")
        rows.append(ConvergenceRow(float(eps), float(err), bar, n))
    errs = np.array([r.front_error for r in rows])
    if len(eps_list) >= 2:
        lx, ly = np.log(np.asarray(eps_list)), np.log(errs)
        slope, _ = _least_squares_slope(lx, ly)
        fit = np.polyval(np.polyfit(lx, ly, 1), lx)
        ss_res = float(np.sum((ly - fit) ** 2))
        ss_tot = float(np.sum((ly - ly.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    else:
        slope, r2 = float("nan"), float("nan")
    return ConvergenceTable(tuple(rows), float(tau), float(slope), float(r2))
