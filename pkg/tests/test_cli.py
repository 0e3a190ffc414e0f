import filecmp
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochwave.cli import (RunConfig, main, parse_config, resolve_defaults,
                           run_command, serialize_config)
from stochwave.csvio import read_csv, write_csv
from stochwave.errors import ConfigError


def test_defaults_filled_config():
    cfg = parse_config("command=kernel\nregime=slow\n")
    assert cfg.regime == "slow"
    assert cfg.alpha == 1.0 and cfg.beta == 2.0
    assert cfg.epsilon == 0.1
    assert np.isfinite(cfg.L)


def test_command_only_config_runs_defaults():
    cfg = parse_config("command=kernel\n")
    assert cfg.regime == "slow"
    cfg = parse_config("command=compare\n")
    assert cfg.regime == "fast"


def test_all_errors_reported_at_once():
    with pytest.raises(ConfigError) as exc:
        parse_config("alpha=1.5\nbeta=1.5\nnosuchkey=3\nepsilon=maybe\n")
    msgs = "\n".join(exc.value.problems)
    assert "nosuchkey" in msgs
    assert "epsilon" in msgs
    assert "admissible" in msgs
    assert len(exc.value.problems) == 3


def test_translational_speed_validation():
    with pytest.raises(ConfigError, match="c_o"):
        parse_config("command=kernel\nregime=translational\nv=1.5\n")


_FLOAT_CHOICES = {
    "epsilon": [0.05, 0.1, 0.2],
    "tau_max": [0.25, 0.5, 1.0],
    "S": [2.0, 4.0, 6.0],
    "Z_max": [4.0, 12.0],
}


@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_config_round_trip_fuzzed(data):
    lines = ["command=" + data.draw(st.sampled_from(["kernel", "limit", "simulate"]))]
    lines.append("regime=" + data.draw(st.sampled_from(["slow", "fast"])))
    for key, choices in _FLOAT_CHOICES.items():
        if data.draw(st.booleans()):
            lines.append(f"{key}={data.draw(st.sampled_from(choices))}")
    if data.draw(st.booleans()):
        lines.append(f"seed={data.draw(st.integers(0, 2**31))}")
    if data.draw(st.booleans()):
        lines.append(f"n_modes={data.draw(st.integers(0, 256))}")
    cfg = parse_config("\n".join(lines))
    again = parse_config(serialize_config(cfg))
    assert cfg == again


def test_csv_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    cols = [("a", np.array([1.0, 2.5, -3.75e-8])), ("b", np.array([4, 5, 6], dtype=float))]
    write_csv(path, cols, comments=["hello=1", "world"])
    comments, data = read_csv(path)
    assert comments == ["hello=1", "world"]
    assert np.array_equal(data["a"], cols[0][1])
    assert np.array_equal(data["b"], cols[1][1])


def test_kernel_zero_fluctuation_artifact(tmp_path):
    rc = run_command(parse_config("command=kernel\nn_modes=0\n"), tmp_path)
    assert rc == 0
    _, data = read_csv(tmp_path / "kernel_table.csv")
    assert np.nanmax(np.abs(data["gamma_c"])) == 0.0
    assert np.nanmax(np.abs(data["gamma_s"])) == 0.0


def test_kernel_artifact_reingestion(tmp_path):
    rc = run_command(parse_config("command=kernel\n"), tmp_path)
    assert rc == 0
    comments, data = read_csv(tmp_path / "kernel_table.csv")
    assert set(data) == {"omega", "gamma_re", "gamma_im", "gamma_c", "gamma_s"}
    assert any(c.startswith("stochwave_version=") for c in comments)
    # Bochner sign holds in the exported table too
    assert np.min(data["gamma_c"]) >= -1e-12


def test_simulate_bytewise_determinism(tmp_path):
    cfgtxt = "command=simulate\nn_realizations=4\ntau_max=0.15\ntau_points=2\nworkers=2\n"
    d1 = tmp_path / "a"
    d2 = tmp_path / "b"
    assert run_command(parse_config(cfgtxt), d1) == 0
    assert run_command(parse_config(cfgtxt), d2) == 0
    for name in os.listdir(d1):
        assert filecmp.cmp(d1 / name, d2 / name, shallow=False), name


def test_simulate_artifacts_reingest(tmp_path):
    cfgtxt = "command=simulate\nn_realizations=3\ntau_max=0.15\ntau_points=2\n"
    assert run_command(parse_config(cfgtxt), tmp_path) == 0
    _, front = read_csv(tmp_path / "ensemble_front_stats.csv")
    _, travel = read_csv(tmp_path / "ensemble_travel_stats.csv")
    _, rec = read_csv(tmp_path / "wavefront_record.csv")
    assert {"tau", "s", "mean_a", "var_a"} <= set(front)
    assert {"tau", "mean_w", "var_w"} <= set(travel)
    assert {"tau", "s", "a_eps", "w_eps"} <= set(rec)
    assert np.all(front["var_a"] >= 0.0)


def test_simulate_fdtd_probe_dump(tmp_path):
    cfgtxt = ("command=simulate\nsolver=fdtd+extract\nepsilon=0.15\n"
              "n_realizations=1\ntau_max=0.3\ntau_points=2\n"
              "points_per_wavelength=50\n")
    assert run_command(parse_config(cfgtxt), tmp_path) == 0
    comments, probes = read_csv(tmp_path / "fdtd_probes.csv")
    assert {"t", "z", "p", "u"} == set(probes)
    assert any(c.startswith("dz=") for c in comments)
    _, rec = read_csv(tmp_path / "wavefront_record.csv")
    assert {"tau", "s", "a_eps", "w_eps"} <= set(rec)


def test_main_cli_entry(tmp_path):
    rc = main(["kernel", "--out", str(tmp_path), "--seed", "3"])
    assert rc == 0
    assert (tmp_path / "kernel_table.csv").exists()
    rc = main(["kernel", "--config", "/nonexistent/zzz"])
    assert rc == 2


def test_main_rejects_command_mismatch(tmp_path):
    cfg_path = tmp_path / "c.cfg"
    cfg_path.write_text("command=kernel\n")
    assert main(["limit", "--config", str(cfg_path), "--out", str(tmp_path)]) == 2


def test_medium_command(tmp_path):
    assert run_command(parse_config("command=medium\nn_realizations=100\n"), tmp_path) == 0
    comments, data = read_csv(tmp_path / "medium_diagnostics.csv")
    assert {"lag_t", "lag_z", "phi_target", "phi_empirical", "stderr"} == set(data)
    assert any(c.startswith("bound_mu=") for c in comments)
    # empirical autocorrelation tracks the target within a few stderr
    dev = np.abs(data["phi_empirical"] - data["phi_target"])
    assert np.mean(dev <= 4 * data["stderr"]) > 0.9


def test_oscillator_command(tmp_path):
    cfgtxt = ("command=oscillator\nregime=fast\nomega_list=1\n"
              "n_realizations=4\nZ_max=2\n")
    assert run_command(parse_config(cfgtxt), tmp_path) == 0
    _, summary = read_csv(tmp_path / "oscillator_summary.csv")
    assert {"omega", "lyapunov_mean", "lyapunov_std", "predicted_rate"} == set(summary)
    _, traces = read_csv(tmp_path / "oscillator_traces.csv")
    assert {"omega", "Z", "mean_half_log_energy"} == set(traces)


def test_convergence_command(tmp_path):
    cfgtxt = ("command=convergence\neps_list=0.15,0.1\nn_realizations=4\n"
              "tau_max=0.15\nworkers=2\n")
    assert run_command(parse_config(cfgtxt), tmp_path) == 0
    comments, data = read_csv(tmp_path / "convergence_table.csv")
    assert {"epsilon", "front_error", "error_bar", "n"} == set(data)
    assert data["epsilon"].tolist() == [0.15, 0.1]
    assert any(c.startswith("fitted_exponent=") for c in comments)


def test_compare_exit_code_on_failed_threshold(tmp_path):
    # impossible spectral tolerance forces a nonzero exit
    cfgtxt = ("command=compare\nregime=slow\nn_realizations=6\ntau_max=0.15\n"
              "tau_points=2\nworkers=2\nspectral_tol=1e-12\n")
    rc = run_command(parse_config(cfgtxt), tmp_path)
    assert rc == 1
    text = (tmp_path / "comparison_summary.txt").read_text()
    assert "FAIL" in text
