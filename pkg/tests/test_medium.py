import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochwave.errors import SpecValidationError
from stochwave.medium import (AutocorrSpec, MediumSpec, TRANSLATIONAL,
                              build_field, eval_mu, eval_mu_t, eval_mu_z,
                              make_pulse)


def slow_spec(**kw):
    kw.setdefault("epsilon", 0.1)
    kw.setdefault("alpha", 1.0)
    kw.setdefault("beta", 2.0)
    return MediumSpec(**kw)


# ---------------------------------------------------------------------------
# field construction and invariants
# ---------------------------------------------------------------------------

def test_zero_fluctuation_sentinel():
    f = build_field(slow_spec(n_modes=0))
    t = np.linspace(-3, 7, 40)
    z = np.linspace(0, 9, 40)
    assert np.all(eval_mu(f, t, z) == 0.0)
    assert np.all(eval_mu_t(f, t, z) == 0.0)
    assert np.all(eval_mu_z(f, t, z) == 0.0)
    assert f.bound == 0.0


def test_unit_variance_monte_carlo():
    # sample mean of mu^2 at one point over 10^4 seeds: exact value 1
    n = 10_000
    vals = np.empty(n)
    for i in range(n):
        f = build_field(slow_spec(seed=i))
        vals[i] = f.mu(0.37, 1.91) ** 2
    se = vals.std(ddof=1) / np.sqrt(n)
    assert abs(vals.mean() - 1.0) <= 3.0 * se


def test_empirical_space_integral_normalization():
    # int Phi(0, z) dz over +-5 widths = 1 +- 0.05 (forced by normalization)
    n = 10_000
    lags = np.linspace(-5.0, 5.0, 81)
    acc = np.zeros(lags.size)
    t0, z0 = 0.8, 2.5
    for i in range(n):
        f = build_field(slow_spec(seed=20_000 + i))
        acc += f.mu(t0, z0) * f.mu(t0, z0 + lags)
    emp = np.trapezoid(acc / n, lags)
    assert abs(emp - 1.0) <= 0.05


def test_empirical_autocorrelation_matches_target():
    # >= 5 lags against the separable Gaussian, Monte Carlo tolerance
    n = 10_000
    lags = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    prods = np.zeros((n, len(lags)))
    t0, z0 = 1.3, 2.7
    for i in range(n):
        f = build_field(slow_spec(seed=60_000 + i))
        base = f.mu(t0, z0)
        for j, (lt, lz) in enumerate(lags):
            prods[i, j] = base * f.mu(t0 + lt, z0 + lz)
    spec = slow_spec()
    target = np.array([float(spec.autocorr.phi(lt, lz)) for lt, lz in lags])
    mean = prods.mean(axis=0)
    se = prods.std(axis=0, ddof=1) / np.sqrt(n)
    assert np.all(np.abs(mean - target) <= 3.5 * se)


def test_stationarity_between_base_points():
    # autocorrelation estimates at shifted base points agree within 3 sigma
    n = 10_000
    lags = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (1.0, 1.0), (0.0, 2.0)]
    diffs = np.zeros((n, len(lags)))
    for i in range(n):
        f = build_field(slow_spec(seed=40_000 + i))
        for j, (lt, lz) in enumerate(lags):
            p1 = f.mu(0.3, 1.1) * f.mu(0.3 + lt, 1.1 + lz)
            p2 = f.mu(5.3, 6.1) * f.mu(5.3 + lt, 6.1 + lz)
            diffs[i, j] = p1 - p2
    mean = diffs.mean(axis=0)
    se = diffs.std(axis=0, ddof=1) / np.sqrt(n)
    assert np.all(np.abs(mean) <= 3.0 * se)


def test_boundedness_exact():
    f = build_field(slow_spec(seed=5))
    rng = np.random.default_rng(0)
    t = rng.uniform(-20, 20, 10_000)
    z = rng.uniform(0, 30, 10_000)
    b = f.bounds
    assert np.all(np.abs(f.mu(t, z)) <= b.mu)
    assert np.all(np.abs(f.mu_t(t, z)) <= b.mu_t)
    assert np.all(np.abs(f.mu_z(t, z)) <= b.mu_z)


def test_derivatives_match_finite_differences():
    f = build_field(slow_spec(seed=11))
    t, z = 0.73, 3.17
    h = 1e-5
    fd_z = (f.mu(t, z + h) - f.mu(t, z - h)) / (2 * h)
    fd_t = (f.mu(t + h, z) - f.mu(t - h, z)) / (2 * h)
    assert abs(fd_z - f.mu_z(t, z)) <= 1e-6
    assert abs(fd_t - f.mu_t(t, z)) <= 1e-6


def test_finite_difference_error_slope_is_second_order():
    f = build_field(slow_spec(seed=11))
    pts = [(0.73, 3.17), (1.9, 0.6), (4.2, 7.7)]
    hs = np.array([1e-3, 1e-4, 1e-5])
    errs = []
    for h in hs:
        e = 0.0
        for t, z in pts:
            fd = (f.mu(t, z + h) - f.mu(t, z - h)) / (2 * h)
            e = max(e, abs(fd - f.mu_z(t, z)))
        errs.append(e)
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert 1.8 <= slope <= 2.2


def test_translational_field_is_shifted_eta():
    spec = MediumSpec(epsilon=0.1, alpha=2.0, beta=2.0,
                      autocorr=AutocorrSpec(kind=TRANSLATIONAL, v=0.6), seed=3)
    f = build_field(spec)
    for t, z in [(0.0, 1.0), (1.2, 3.3), (4.0, 2.0)]:
        assert f.mu(t, z) == pytest.approx(float(f.eta(z - 0.6 * t)), abs=1e-14)


def test_seed_reproducibility_bitwise():
    f1 = build_field(slow_spec(seed=99))
    f2 = build_field(slow_spec(seed=99))
    assert np.array_equal(f1.w, f2.w)
    assert np.array_equal(f1.k, f2.k)
    assert np.array_equal(f1.phase, f2.phase)


@settings(max_examples=60, deadline=None)
@given(t=st.floats(-50, 50), z=st.floats(-10, 60), seed=st.integers(0, 2**31 - 1))
def test_eval_mu_total_and_bounded(t, z, seed):
    f = build_field(slow_spec(seed=seed, n_modes=16))
    v = f.mu(t, z)
    assert np.isfinite(v)
    assert abs(v) <= f.bound + 1e-12


# ---------------------------------------------------------------------------
# spec validation
# ---------------------------------------------------------------------------

def test_inadmissible_regime_pairs_rejected():
    with pytest.raises(SpecValidationError, match="admissible"):
        MediumSpec(epsilon=0.1, alpha=1.5, beta=1.5)
    with pytest.raises(SpecValidationError):
        MediumSpec(epsilon=0.1, alpha=2.0, beta=2.0)   # (2,2) needs translational
    with pytest.raises(SpecValidationError, match="v"):
        MediumSpec(epsilon=0.1, alpha=2.0, beta=2.0,
                   autocorr=AutocorrSpec(kind=TRANSLATIONAL, v=1.5))


def test_non_normalizable_widths_rejected():
    with pytest.raises(SpecValidationError, match="non-normalizable"):
        AutocorrSpec(time_width=2.0).validate()


def test_autocorr_normalization_by_quadrature():
    ac = AutocorrSpec()
    z = np.linspace(-8, 8, 4001)
    assert ac.phi(0.0, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert np.trapezoid(ac.phi_time(z), z) == pytest.approx(1.0, abs=1e-10)
    assert np.trapezoid(ac.phi_space(z), z) == pytest.approx(1.0, abs=1e-10)


# ---------------------------------------------------------------------------
# pulse
# ---------------------------------------------------------------------------

def test_pulse_compact_support():
    p = make_pulse("gabor", 4.0)
    assert p(-0.1) == 0.0
    assert p(4.1) == 0.0
    assert p(np.array([-5.0, 0.0, 4.0, 9.0])).tolist() == [0.0, 0.0, 0.0, 0.0]


def test_gabor_spectrum_peaks_at_carrier():
    p = make_pulse("gabor", 4.0)
    omega = np.linspace(0.1, 15.0, 3000)
    spec = np.abs(p.spectrum(omega))
    peak = omega[np.argmax(spec)]
    assert abs(peak - 2 * np.pi) / (2 * np.pi) <= 0.05


def test_raised_cosine_dc_suppression():
    p = make_pulse("raised-cosine-carrier", 4.0)
    omega = np.linspace(0.0, 15.0, 3000)
    spec = np.abs(p.spectrum(omega))
    assert spec[0] / spec.max() <= 1e-2


def test_pulse_support_too_small():
    with pytest.raises(SpecValidationError, match="S"):
        make_pulse("gabor", 1.0)
    with pytest.raises(SpecValidationError):
        make_pulse("unknown-kind", 4.0)


def test_pulse_continuously_differentiable_at_edges():
    p = make_pulse("gabor", 4.0)
    h = 1e-6
    # one-sided slopes at the support edges stay small (C^1 across the edge)
    for edge in (0.0, 4.0):
        inner = p(edge + h) if edge == 0.0 else p(edge - h)
        assert abs(inner) / h <= 1e-4
