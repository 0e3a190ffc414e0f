"""stochwave command line: plain key=value configs in, CSV artifacts out.

Commands: medium, kernel, limit, simulate, compare, oscillator, convergence.
Every artifact embeds the resolved configuration and package version as '#'
comment lines, so identical config and seed reproduce identical bytes.
"""

import argparse
import sys
from dataclasses import dataclass, fields as dc_fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .csvio import write_csv
from .errors import ConfigError, SpecValidationError
from .medium import (AutocorrSpec, MediumSpec, PULSE_GABOR, REGIME_FAST,
                     REGIME_SLOW, REGIME_TRANSLATIONAL, SEPARABLE_GAUSSIAN,
                     TRANSLATIONAL, build_field, make_pulse)
from .solver import default_front_grid
from .theory import (gamma_of_omega, limit_volterra, oscillator_rate,
                     psi_kernel, stable_front, translational_gamma)
from . import ensemble as ens

COMMANDS = ("medium", "kernel", "limit", "simulate", "compare", "oscillator", "convergence")

_REGIME_AB = {REGIME_SLOW: (1.0, 2.0), REGIME_FAST: (2.0, 1.0), REGIME_TRANSLATIONAL: (2.0, 2.0)}


@dataclass(frozen=True)
class RunConfig:
    command: str = ""
    regime: str = ""                  # resolved per command when omitted
    alpha: float = float("nan")       # resolved from regime when omitted
    beta: float = float("nan")
    epsilon: float = 0.1
    c_o: float = 1.0
    v: float = 0.0
    n_modes: int = 64
    seed: int = 0
    L: float = float("nan")           # resolved from tau_max when omitted
    pulse: str = PULSE_GABOR
    S: float = 4.0
    tau_max: float = 0.5
    tau_points: int = 6
    s_pad: float = 6.0
    points_per_period: int = 32
    n_realizations: int = 200
    solver: str = ens.SOLVER_WAVEFRONT
    points_per_wavelength: int = 100
    workers: int = 0
    omega_max: float = 8.0 * np.pi
    omega_points: int = 1025
    omega_list: tuple = (1.0, 2.0)
    Z_max: float = 12.0
    steps_per_osc: int = 50
    eps_list: tuple = (0.2, 0.1, 0.05)
    front_dx: float = 1.0 / 2048.0
    front_s_max: float = 32.0
    front_error_max: float = 0.10
    slope_tol: float = 0.15
    drift_tol: float = 0.10
    ks_alpha: float = 0.05
    spectral_tol: float = 0.10


_FLOAT_KEYS = {"alpha", "beta", "epsilon", "c_o", "v", "L", "S", "tau_max", "s_pad",
               "omega_max", "Z_max", "front_dx", "front_s_max", "front_error_max",
               "slope_tol", "drift_tol", "ks_alpha", "spectral_tol"}
_INT_KEYS = {"n_modes", "seed", "tau_points", "points_per_period", "n_realizations",
             "points_per_wavelength", "workers", "omega_points", "steps_per_osc"}
_LIST_KEYS = {"omega_list", "eps_list"}
_STR_KEYS = {"command", "regime", "pulse", "solver"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _LIST_KEYS | _STR_KEYS


def parse_config(text: str) -> RunConfig:
    """Parse key=value lines ('#' comments); report every error at once."""
    problems = []
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected key=value, got {raw!r}")
            continue
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _ALL_KEYS:
            problems.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in values:
            problems.append(f"line {lineno}: duplicate key {key!r}")
            continue
        try:
            if key in _FLOAT_KEYS:
                values[key] = float(val)
            elif key in _INT_KEYS:
                values[key] = int(val)
            elif key in _LIST_KEYS:
                values[key] = tuple(float(v) for v in val.split(",") if v.strip())
            else:
                values[key] = val
        except ValueError:
            problems.append(f"line {lineno}: cannot parse value for {key!r}: {val!r}")
    cfg = replace(RunConfig(), **values)
    problems += validate_config(cfg)
    if problems:
        raise ConfigError(problems)
    return resolve_defaults(cfg)


def validate_config(cfg: RunConfig):
    problems = []
    if cfg.command and cfg.command not in COMMANDS:
        problems.append(f"unknown command {cfg.command!r}; choose from {', '.join(COMMANDS)}")
    if cfg.regime and cfg.regime not in _REGIME_AB:
        problems.append(f"unknown regime {cfg.regime!r}")
    a, b = cfg.alpha, cfg.beta
    if not (np.isnan(a) and np.isnan(b)):
        ab = _REGIME_AB.get(cfg.regime or REGIME_SLOW, (1.0, 2.0))
        aa = a if not np.isnan(a) else ab[0]
        bb = b if not np.isnan(b) else ab[1]
        admissible = (aa <= 1.0 and bb == 2.0) or (aa == 2.0 and bb <= 1.0) or (aa == 2.0 and bb == 2.0)
        if not admissible:
            problems.append(
                f"alpha={aa}, beta={bb} is not an admissible regime pair: need "
                "alpha <= 1 with beta = 2 (slow), alpha = 2 with beta <= 1 (fast), "
                "or alpha = beta = 2 (translational)")
    if not 0.0 < cfg.epsilon < 1.0:
        problems.append(f"epsilon={cfg.epsilon} outside (0, 1)")
    if abs(cfg.v) >= cfg.c_o:
        problems.append(f"|v|={abs(cfg.v)} must be < c_o={cfg.c_o}")
    if cfg.S < 2.0:
        problems.append(f"S={cfg.S} too small: pulse support needs >= 2 carrier periods")
    if cfg.solver not in (ens.SOLVER_WAVEFRONT, ens.SOLVER_FDTD):
        problems.append(f"unknown solver {cfg.solver!r}")
    if cfg.n_realizations < 1:
        problems.append("n_realizations must be >= 1")
    if len(cfg.eps_list) > 1 and np.any(np.diff(cfg.eps_list) >= 0):
        problems.append("eps_list must be strictly decreasing")
    return problems


def resolve_defaults(cfg: RunConfig) -> RunConfig:
    regime = cfg.regime
    if not regime:
        regime = REGIME_FAST if cfg.command == "compare" else REGIME_SLOW
    a, b = _REGIME_AB[regime]
    alpha = cfg.alpha if not np.isnan(cfg.alpha) else a
    beta = cfg.beta if not np.isnan(cfg.beta) else b
    eps_hi = max([cfg.epsilon] + list(cfg.eps_list))
    L = cfg.L if not np.isnan(cfg.L) else float(np.ceil(
        cfg.c_o * cfg.tau_max + 6.0 * eps_hi**min(beta, 2.0) + 0.5))
    return replace(cfg, regime=regime, alpha=alpha, beta=beta, L=L)


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for f in dc_fields(RunConfig):
        val = getattr(cfg, f.name)
        if f.name in _LIST_KEYS:
            txt = ",".join("%.17g" % v for v in val)
        elif f.name in _FLOAT_KEYS:
            txt = "%.17g" % val
        else:
            txt = str(val)
        lines.append(f"{f.name}={txt}")
    return "\n".join(lines) + "\n"


def _medium_spec(cfg: RunConfig) -> MediumSpec:
    kind = TRANSLATIONAL if cfg.regime == REGIME_TRANSLATIONAL else SEPARABLE_GAUSSIAN
    ac = AutocorrSpec(kind=kind, v=cfg.v)
    return MediumSpec(epsilon=cfg.epsilon, alpha=cfg.alpha, beta=cfg.beta,
                      c_o=cfg.c_o, autocorr=ac, n_modes=cfg.n_modes,
                      seed=cfg.seed, L=cfg.L)


def _kernel_table(cfg: RunConfig):
    omega = np.linspace(-cfg.omega_max, cfg.omega_max, cfg.omega_points)
    ac_kind = TRANSLATIONAL if cfg.regime == REGIME_TRANSLATIONAL else SEPARABLE_GAUSSIAN
    ac = AutocorrSpec(kind=ac_kind, v=cfg.v)
    if cfg.regime == REGIME_TRANSLATIONAL:
        return translational_gamma(cfg.v, ac, omega, cfg.c_o)
    return gamma_of_omega(psi_kernel(ac, cfg.regime, cfg.c_o), omega)


def _comments(cfg: RunConfig):
    header = [f"stochwave_version={__version__}"]
    header += serialize_config(cfg).strip().splitlines()
    return header


def _tau_grid(cfg):
    return np.linspace(0.0, cfg.tau_max, max(2, cfg.tau_points))


def run_command(cfg: RunConfig, out_dir) -> int:
    """Dispatch one command; returns the process exit status."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    hdr = _comments(cfg)
    pulse = make_pulse(cfg.pulse, cfg.S)
    scale = 0.0 if cfg.n_modes == 0 else 1.0   # zero-fluctuation sentinel

    if cfg.command == "medium":
        spec = _medium_spec(cfg)
        lags = np.linspace(-3.0, 3.0, 25)
        n = max(cfg.n_realizations, 100)
        base_t, base_z = 1.0, 2.0
        prods_t = np.zeros((n, lags.size))
        prods_z = np.zeros((n, lags.size))
        for i in range(n):
            fld = build_field(replace(spec, seed=cfg.seed + i))
            m0 = fld.mu(base_t, base_z)
            prods_t[i] = m0 * fld.mu(base_t + lags, base_z)
            prods_z[i] = m0 * fld.mu(base_t, base_z + lags)
        rows = []
        for axis, prods in (("t", prods_t), ("z", prods_z)):
            target = spec.autocorr.phi(lags, 0.0) if axis == "t" else spec.autocorr.phi(0.0, lags)
            emp = prods.mean(axis=0)
            se = prods.std(axis=0, ddof=1) / np.sqrt(n)
            for j, lag in enumerate(lags):
                rows.append((lag if axis == "t" else 0.0,
                             lag if axis == "z" else 0.0,
                             scale * target[j], emp[j], se[j]))
        arr = np.array(rows)
        fld = build_field(spec)
        write_csv(out / "medium_diagnostics.csv",
                  [("lag_t", arr[:, 0]), ("lag_z", arr[:, 1]),
                   ("phi_target", arr[:, 2]), ("phi_empirical", arr[:, 3]),
                   ("stderr", arr[:, 4])],
                  hdr + [f"bound_mu={fld.bound:.17g}", f"n_diag_realizations={n}"])
        print(f"medium diagnostics over {n} realizations -> {out / 'medium_diagnostics.csv'}")
        return 0

    if cfg.command == "kernel":
        table = _kernel_table(cfg)
        write_csv(out / "kernel_table.csv",
                  [("omega", table.omega),
                   ("gamma_re", scale * np.real(table.gamma)),
                   ("gamma_im", scale * np.imag(table.gamma)),
                   ("gamma_c", scale * table.gamma_c),
                   ("gamma_s", scale * table.gamma_s)],
                  hdr + [f"D={scale * table.D:.17g}", f"h={scale * table.h:.17g}"])
        print(f"kernel table ({cfg.regime}) -> {out / 'kernel_table.csv'}")
        return 0

    if cfg.command == "limit":
        table = _kernel_table(cfg)
        kernel = table.kernel
        taus = _tau_grid(cfg)
        lf = stable_front(pulse, table, taus, dx=cfg.front_dx, s_max=cfg.front_s_max)
        lv = limit_volterra(pulse, kernel, cfg.tau_max, tau_grid=taus,
                            dx=cfg.front_dx, s_max=cfg.front_s_max)
        dist = np.array([
            np.linalg.norm(lf.values[i] - lv.values[i]) / max(np.linalg.norm(lf.values[i]), 1e-300)
            for i in range(taus.size)])
        stride = max(1, lf.s.size // 4096)
        for name, front in (("limit_front_transform.csv", lf), ("limit_front_volterra.csv", lv)):
            tau_col, s_col, a_col = [], [], []
            for i, tau in enumerate(front.tau):
                tau_col.append(np.full(front.s[::stride].size, tau))
                s_col.append(front.s[::stride])
                a_col.append(front.values[i, ::stride])
            write_csv(out / name,
                      [("tau", np.concatenate(tau_col)), ("s", np.concatenate(s_col)),
                       ("a_bar", np.concatenate(a_col))],
                      hdr + [f"sample_stride={stride}"])
        write_csv(out / "limit_summary.csv", [("tau", taus), ("rel_l2", dist)], hdr)
        print(f"cross-method distance max over tau grid: {dist.max():.3e}")
        return 0

    if cfg.command == "simulate":
        spec = _medium_spec(cfg)
        s_grid = default_front_grid(pulse, pad=cfg.s_pad,
                                    points_per_period=cfg.points_per_period)
        taus = _tau_grid(cfg)
        stats = ens.run_ensemble(spec, pulse, cfg.solver, cfg.n_realizations,
                                 cfg.seed, cfg.tau_max, tau_checkpoints=taus,
                                 s_grid=s_grid, workers=cfg.workers,
                                 points_per_wavelength=cfg.points_per_wavelength)
        tau_col = np.repeat(stats.tau, stats.s.size)
        s_col = np.tile(stats.s, stats.tau.size)
        write_csv(out / "ensemble_front_stats.csv",
                  [("tau", tau_col), ("s", s_col),
                   ("mean_a", stats.mean_a.ravel()), ("var_a", stats.var_a.ravel())],
                  hdr + [f"n={stats.n}"])
        write_csv(out / "ensemble_travel_stats.csv",
                  [("tau", stats.tau), ("mean_w", stats.mean_W), ("var_w", stats.var_W)],
                  hdr + [f"n={stats.n}"])
        rec = _record_and_probe_dump(spec, pulse, cfg, s_grid, taus, out, hdr)
        write_csv(out / "wavefront_record.csv",
                  [("tau", np.repeat(rec.tau, rec.s.size)),
                   ("s", np.tile(rec.s, rec.tau.size)),
                   ("a_eps", rec.a.ravel()),
                   ("w_eps", np.repeat(rec.W, rec.s.size))],
                  hdr + [f"record_seed={spec.seed}"])
        print(f"ensemble of {stats.n} realizations ({cfg.solver}) -> {out}")
        return 0

    if cfg.command == "compare":
        spec = _medium_spec(cfg)
        table = _kernel_table(cfg)
        s_grid = default_front_grid(pulse, pad=cfg.s_pad,
                                    points_per_period=cfg.points_per_period)
        taus = _tau_grid(cfg)
        stats = ens.run_ensemble(spec, pulse, cfg.solver, cfg.n_realizations,
                                 cfg.seed, cfg.tau_max, tau_checkpoints=taus,
                                 s_grid=s_grid, workers=cfg.workers)
        # mode-rich field so the path integral has enough live spectral modes
        # for Gaussian statistics; drift and slope are unbiased at any count
        trav_spec = replace(spec, n_modes=max(spec.n_modes, 1024)) if spec.n_modes else spec
        trav = ens.run_travel_time_ensemble(trav_spec, taus[taus > 0],
                                            max(cfg.n_realizations, 2000),
                                            cfg.seed, workers=cfg.workers)
        front = stable_front(pulse, table, taus, s_grid=s_grid)
        thresholds = dict(front_error=cfg.front_error_max,
                          variance_slope_rel=cfg.slope_tol,
                          drift_abs=cfg.drift_tol,
                          ks_alpha=cfg.ks_alpha,
                          spectral_rel=cfg.spectral_tol,
                          energy_gain=(cfg.regime == REGIME_FAST))
        rep = ens.compare(stats, front, table, pulse, travel_stats=trav,
                          thresholds=thresholds)
        write_csv(out / "comparison_report.csv",
                  [("tau", rep.tau), ("front_error", rep.front_error)],
                  hdr + [f"variance_slope={rep.variance_slope:.17g}",
                         f"variance_slope_stderr={rep.variance_slope_stderr:.17g}",
                         f"drift={rep.drift:.17g}",
                         f"drift_stderr={rep.drift_stderr:.17g}",
                         f"ks_statistic={rep.ks_statistic:.17g}",
                         f"ks_pvalue={rep.ks_pvalue:.17g}",
                         f"spectral_max_rel_dev={rep.spectral_max_rel_dev:.17g}",
                         f"mean_front_energy={rep.mean_front_energy:.17g}",
                         f"pulse_energy={rep.pulse_energy:.17g}",
                         f"D_squared={rep.D_squared:.17g}", f"h={rep.h:.17g}"])
        lines = [
            f"regime={rep.regime} epsilon={rep.epsilon} n={stats.n}",
            f"front error per tau: {np.array2string(rep.front_error, precision=4)}",
            f"variance slope {rep.variance_slope:.4f} +- {rep.variance_slope_stderr:.4f} (D^2 = {rep.D_squared:.4f})",
            f"drift {rep.drift:.4f} +- {rep.drift_stderr:.4f} (h = {rep.h:.1f})",
            f"KS statistic {rep.ks_statistic:.4f}, p = {rep.ks_pvalue:.4f}",
            f"spectral max rel deviation {rep.spectral_max_rel_dev:.4f} over band {rep.spectral_band}",
            f"mean front energy {rep.mean_front_energy:.6f} vs pulse {rep.pulse_energy:.6f}",
            "thresholds: " + ", ".join(f"{k}={'pass' if v else 'FAIL'}" for k, v in rep.passed.items()),
        ]
        (out / "comparison_summary.txt").write_text("\n".join(lines) + "\n")
        print("\n".join(lines))
        return 0 if rep.all_passed() else 1

    if cfg.command == "oscillator":
        spec = _medium_spec(cfg)
        table = _kernel_table(cfg)
        rows = []
        trace_cols = {"omega": [], "Z": [], "mean_half_log_energy": []}
        for om in cfg.omega_list:
            run = ens.run_oscillator_ensemble(spec, om, cfg.n_realizations,
                                              cfg.seed, Z_max=cfg.Z_max,
                                              steps_per_osc=cfg.steps_per_osc)
            pred = oscillator_rate(table, om) * scale
            rows.append((om, run.lyapunov.mean(), run.lyapunov.std(ddof=1) if cfg.n_realizations > 1 else 0.0, pred))
            trace_cols["omega"].append(np.full(run.Z.size, om))
            trace_cols["Z"].append(run.Z)
            trace_cols["mean_half_log_energy"].append(0.5 * np.log(run.energy).mean(axis=0))
        arr = np.array(rows)
        write_csv(out / "oscillator_summary.csv",
                  [("omega", arr[:, 0]), ("lyapunov_mean", arr[:, 1]),
                   ("lyapunov_std", arr[:, 2]), ("predicted_rate", arr[:, 3])], hdr)
        write_csv(out / "oscillator_traces.csv",
                  [(k, np.concatenate(v)) for k, v in trace_cols.items()], hdr)
        for om, mean, std, pred in rows:
            print(f"omega={om}: lyapunov {mean:.5f} +- {std:.5f}, predicted {pred:.5f}")
        return 0

    if cfg.command == "convergence":
        spec = _medium_spec(cfg)
        table = _kernel_table(cfg)
        s_grid = default_front_grid(pulse, pad=cfg.s_pad,
                                    points_per_period=cfg.points_per_period)

        def front_builder(s, tau):
            return stable_front(pulse, table, [tau], s_grid=s).values[0]

        tab = ens.convergence_study(spec, pulse, cfg.eps_list, cfg.n_realizations,
                                    cfg.tau_max, cfg.seed, front_builder,
                                    s_grid=s_grid, workers=cfg.workers)
        write_csv(out / "convergence_table.csv",
                  [("epsilon", [r.epsilon for r in tab.rows]),
                   ("front_error", [r.front_error for r in tab.rows]),
                   ("error_bar", [r.error_bar for r in tab.rows]),
                   ("n", [r.n for r in tab.rows])],
                  hdr + [f"fitted_exponent={tab.fitted_exponent:.17g}",
                         f"r_squared={tab.r_squared:.17g}"])
        for r in tab.rows:
            print(f"epsilon={r.epsilon}: front_error={r.front_error:.4f} +- {r.error_bar:.4f}")
        print(f"fitted error exponent {tab.fitted_exponent:.3f} (R^2 = {tab.r_squared:.3f}; diagnostic only)")
        return 0

    raise ConfigError([f"unknown command {cfg.command!r}"])


def _record_and_probe_dump(spec, pulse, cfg, s_grid, taus, out, hdr):
    """One retained realization: its wavefront record, plus FDTD probe dumps
    (columns t, z, p, u with grid metadata) when the acoustic solver runs."""
    from .solver import build_grid, extract_front, fdtd_run, wavefront_integrate

    field = build_field(spec)
    if cfg.solver == ens.SOLVER_FDTD:
        grid = build_grid(spec, field, pulse, cfg.tau_max,
                          points_per_wavelength=cfg.points_per_wavelength)
        live = [t for t in taus if t > 0]
        hist = fdtd_run(field, pulse, spec, grid,
                        probe_z=[cfg.c_o * t for t in live])
        n_p = hist.probe_z.size
        write_csv(out / "fdtd_probes.csv",
                  [("t", np.tile(hist.t, n_p)),
                   ("z", np.repeat(hist.probe_z, hist.t.size)),
                   ("p", hist.probe_p.T.ravel()),
                   ("u", hist.probe_u.T.ravel())],
                  hdr + [f"record_seed={spec.seed}",
                         f"dz={grid.dz:.17g}", f"dt={grid.dt:.17g}",
                         f"z_min={grid.z_min:.17g}", f"z_max={grid.z_max:.17g}",
                         f"t_max={grid.t_max:.17g}"])
        return extract_front(hist, field, spec, pulse, s_grid=s_grid, taus=live)
    return wavefront_integrate(field, pulse, spec, cfg.tau_max,
                               s_grid=s_grid, tau_checkpoints=taus)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stochwave",
        description="Pulse propagation in time dependent randomly layered media")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=str, default=None, help="key=value config file")
    parser.add_argument("--out", type=str, default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override base seed")
    parser.add_argument("--workers", type=int, default=None,
                        help="parallel workers (0 = auto; env STOCHWAVE_WORKERS)")
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text() if args.config else ""
        cfg = parse_config(text)
        if cfg.command and cfg.command != args.command:
            raise ConfigError([f"config says command={cfg.command} but CLI asked for {args.command}"])
        cfg = replace(cfg, command=args.command)
        cfg = resolve_defaults(cfg)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.workers is not None:
            cfg = replace(cfg, workers=args.workers)
        return run_command(cfg, args.out)
    except (ConfigError, SpecValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
