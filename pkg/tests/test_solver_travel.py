import dataclasses

import numpy as np
import pytest

from stochwave.errors import SpecValidationError
from stochwave.medium import AutocorrSpec, MediumSpec, TRANSLATIONAL, build_field
from stochwave.solver import _w_increments, travel_time


def spec_slow(**kw):
    kw.setdefault("epsilon", 0.1)
    kw.setdefault("alpha", 1.0)
    kw.setdefault("beta", 2.0)
    return MediumSpec(**kw)


def spec_transl(v=0.5, **kw):
    kw.setdefault("epsilon", 0.1)
    return MediumSpec(alpha=2.0, beta=2.0, autocorr=AutocorrSpec(kind=TRANSLATIONAL, v=v), **kw)


def test_zero_fluctuation_travel_time():
    sp = spec_slow(n_modes=0)
    tt = travel_time(build_field(sp), sp, [0.25, 0.5, 1.0], s=2.0)
    assert np.all(tt.W == 0.0)
    assert np.allclose(tt.t, np.array([0.25, 0.5, 1.0]) + 0.01 * 2.0, atol=1e-15)


def test_closed_midpoint_matches_literal_sum():
    # the mode-rich fast path regroups the same quadrature rule
    sp = spec_slow(seed=7, n_modes=300)
    fl = build_field(sp)
    taus = np.array([0.25, 0.5, 1.0])
    fast = travel_time(fl, sp, taus).W
    du = sp.epsilon**2 / 10.0
    n = int(round(1.0 / du))
    u_mid = (np.arange(n) + 0.5) * du
    lit = np.concatenate([[0.0], np.cumsum(_w_increments(fl, sp, u_mid, du))])
    ref = np.interp(taus, np.arange(n + 1) * du, lit)
    assert np.max(np.abs(fast - ref)) <= 1e-12


def test_step_halving_convergence():
    sp = spec_slow(seed=3)
    fl = build_field(sp)
    w1 = travel_time(fl, sp, [0.5], du=sp.epsilon**2 / 10).W[0]
    w2 = travel_time(fl, sp, [0.5], du=sp.epsilon**2 / 20).W[0]
    assert abs(w1 - w2) <= 5e-3 * max(1.0, abs(w2))


def test_regime2_includes_drift_term():
    sp = MediumSpec(epsilon=0.1, alpha=2.0, beta=1.0, seed=12)
    fl = build_field(sp)
    w = travel_time(fl, sp, [0.5]).W[0]
    # remove the mu^2 drift: the remaining part is the plain path integral
    du = sp.epsilon**2 / 10.0
    n = int(round(0.5 / du))
    u_mid = (np.arange(n) + 0.5) * du
    mu = fl.mu(u_mid / sp.epsilon**2, u_mid / sp.epsilon)
    expect = du / sp.epsilon * mu.sum() - du * np.sum(mu**2)
    assert w == pytest.approx(expect, abs=1e-12)


def test_translational_picard_converges_and_reduces():
    sp = spec_transl(v=0.5, seed=4)
    fl = build_field(sp)
    taus = [0.2, 0.4]
    exact = travel_time(fl, sp, taus)                       # picard default
    lead = travel_time(fl, sp, taus, form="asymptotic")     # leading-order form
    assert np.all(np.isfinite(exact.W))
    # the two forms differ by O(eps) only
    assert np.max(np.abs(exact.W - lead.W)) <= 0.5


def test_translational_zero_speed_matches_static_integral():
    sp = spec_transl(v=0.0, seed=9)
    fl = build_field(sp)
    w = travel_time(fl, sp, [0.4]).W[0]
    du = sp.epsilon**2 / 10.0
    n = int(round(0.4 / du))
    u_mid = (np.arange(n) + 0.5) * du
    ref = du / sp.epsilon * np.sum(fl.eta(u_mid / sp.epsilon**2))
    assert w == pytest.approx(ref, abs=1e-10)


def test_characteristics_monotone_in_s():
    # t_eps(c_o tau, s) strictly increasing in s (characteristics cannot cross)
    sp = spec_transl(v=0.7, seed=21)
    fl = build_field(sp)
    s_values = np.linspace(0.0, 4.0, 9)
    t_at = []
    for s in s_values:
        t_at.append(travel_time(fl, sp, [0.4], s=float(s)).t[0])
    assert np.all(np.diff(t_at) > 0)


def test_tau_grid_validation():
    sp = spec_slow()
    fl = build_field(sp)
    with pytest.raises(SpecValidationError):
        travel_time(fl, sp, [-0.1, 0.5])
    with pytest.raises(SpecValidationError):
        travel_time(fl, sp, [0.5, 0.2])
    with pytest.raises(SpecValidationError, match="truncation"):
        travel_time(fl, sp, [10.0])
