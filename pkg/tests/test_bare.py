import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oscbath.bare import (F_kernel, G_kernel, K_factor, OccupationKind, OccupationTrace,
                          bogoliubov_closed, bogoliubov_finite, bogoliubov_row,
                          occupation_bare_continuum, occupation_bare_finite,
                          thermal_integral_bare, trace_bare_continuum, trace_bare_finite,
                          vacuum_divergence_probe, vacuum_slope)
from oscbath.cavity import solve_spectrum, transform_matrix
from oscbath.errors import DomainError, IndexOutOfRangeError
from oscbath.model import CavitySpec, bose_occupation, validate_params

P = validate_params(1.0, 0.1, 2.0, 1.0)


def K_oracle(p, t):
    # |alpha00|^2 + |beta00|^2 summed straight from the closed-form pair
    pair = bogoliubov_closed(p, "particle", t)
    return abs(pair.alpha) ** 2 + abs(pair.beta) ** 2


# ---- finite cavity ----------------------------------------------------------

def test_initial_conditions(small_cavity):
    spec, T = small_cavity
    n = T.full.shape[0]
    for mu in (0, 1, n - 1):
        a, b = bogoliubov_row(spec, T, mu, 0.0)
        expect = np.zeros(n)
        expect[mu] = 1
        assert np.max(np.abs(a - expect)) < 1e-10
        assert np.max(np.abs(b)) < 1e-10
    pair = bogoliubov_finite(spec, T, 0, 0, 0.0)
    assert abs(pair.alpha - 1) < 1e-10 and abs(pair.beta) < 1e-10


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 5.0, 17.0, 100.0])
def test_symplectic_identity(big_cavity, t):
    spec, T = big_cavity
    a, b = bogoliubov_row(spec, T, 0, t)
    assert abs(np.sum(np.abs(a) ** 2 - np.abs(b) ** 2) - 1) < 1e-8


def test_symplectic_identity_bath_row(small_cavity):
    spec, T = small_cavity
    a, b = bogoliubov_row(spec, T, 5, np.array([0.2, 3.0, 40.0]))
    assert np.max(np.abs((np.abs(a) ** 2 - np.abs(b) ** 2).sum(axis=1) - 1)) < 1e-8


def test_index_errors(small_cavity):
    spec, T = small_cavity
    with pytest.raises(IndexOutOfRangeError):
        bogoliubov_finite(spec, T, 0, 33, 1.0)
    with pytest.raises(IndexOutOfRangeError):
        bogoliubov_row(spec, T, -1, 1.0)


def test_finite_particle_coefficients_vs_closed_form(big_cavity):
    # R=60, N=256 at t=5, well before the revival time 2R.  Observed gaps are
    # 2.5% (alpha) and 2.2% (|beta|), set by the mode cutoff N pi / R; the
    # next test shows them shrinking as N grows.
    spec, T = big_cavity
    fin = bogoliubov_finite(spec, T, 0, 0, 5.0)
    ref = bogoliubov_closed(P, "particle", 5.0)
    assert abs(fin.alpha - ref.alpha) / abs(ref.alpha) < 0.02
    assert abs(abs(fin.beta) - abs(ref.beta)) / abs(ref.beta) < 0.02


def test_finite_particle_coefficients_converge_with_cutoff():
    # the residual gap at N=256 comes from the finite mode cutoff N pi / R
    ref = bogoliubov_closed(P, "particle", 5.0)
    gaps_a, gaps_b = [], []
    for N in (64, 256, 1024):
        spec = solve_spectrum(P, CavitySpec(60.0, N))
        fin = bogoliubov_finite(spec, transform_matrix(P, spec), 0, 0, 5.0)
        gaps_a.append(abs(fin.alpha - ref.alpha) / abs(ref.alpha))
        gaps_b.append(abs(abs(fin.beta) - abs(ref.beta)) / abs(ref.beta))
    assert gaps_a[0] > gaps_a[1] > gaps_a[2]
    assert gaps_b[0] > gaps_b[1] > gaps_b[2]
    assert gaps_a[2] < 0.02 and gaps_b[2] < 0.02


def test_finite_occupation_initial_and_decoupled(small_cavity):
    spec, T = small_cavity
    assert occupation_bare_finite(spec, T, P, 0.0) == pytest.approx(1.0, abs=1e-12)
    p0 = P.with_(g=0.0, n0_initial=3.0)
    s0 = solve_spectrum(p0, CavitySpec(10.0, 32))
    T0 = transform_matrix(p0, s0)
    n = occupation_bare_finite(s0, T0, p0, np.linspace(0, 50, 11))
    assert np.allclose(n, 3.0, rtol=0, atol=1e-13)


def test_zero_temperature_thermal_sum_vanishes(small_cavity):
    # every retained mode has beta omega_k >= 50
    spec, T = small_cavity
    cold = P.with_(beta=50.0 / spec.omegas_bath[0], n0_initial=2.0)
    nb = bose_occupation(spec.omegas_bath, cold.beta)
    for t in (1.0, 7.0, 20.0):
        a, b = bogoliubov_row(spec, T, 0, t)
        assert np.sum((np.abs(a[1:]) ** 2 + np.abs(b[1:]) ** 2) * nb) < 1e-12
        n = occupation_bare_finite(spec, T, cold, t, include_vacuum=True)
        expect = (abs(a[0]) ** 2 + abs(b[0]) ** 2) * 2.0 + np.sum(np.abs(b) ** 2)
        assert n == pytest.approx(expect, abs=1e-12)


def test_finite_vs_continuum_at_t20(big_cavity):
    spec, T = big_cavity
    fin = occupation_bare_finite(spec, T, P, 20.0, include_vacuum=False)
    cont = occupation_bare_continuum(P, 20.0)
    assert abs(fin - cont) / cont < 0.03


def test_t1_against_larger_cavity():
    spec = solve_spectrum(P, CavitySpec(120.0, 512))
    fin = occupation_bare_finite(spec, transform_matrix(P, spec), P, 1.0, include_vacuum=False)
    cont = occupation_bare_continuum(P, 1.0)
    assert abs(fin - cont) / cont < 0.03
    assert P.n0_initial > cont > bose_occupation(1.0, 2.0)


# ---- closed forms -----------------------------------------------------------

def test_beta00_at_zero():
    pair = bogoliubov_closed(P, "particle", 0.0)
    assert pair.beta == pytest.approx(1j * math.pi * 0.1 / 2, abs=1e-15)
    assert abs(pair.beta) ** 2 == pytest.approx(0.0246740, abs=1e-7)


def test_alpha00_decays():
    vals = [abs(bogoliubov_closed(P, "particle", t).alpha) for t in (10, 50, 100, 200)]
    for t, v in zip((10, 50, 100, 200), vals):
        assert v <= 1.2 * math.exp(-math.pi * 0.1 * t / 2)
    assert vals[-1] < 1e-13


def test_K_identity_on_grid():
    for t in np.linspace(0, 60, 100):
        assert abs(K_factor(P, t) - K_oracle(P, t)) < 1e-12
    assert abs(K_factor(P, 10.0) - K_oracle(P, 10.0)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(wb=st.floats(0.3, 3.0), frac=st.floats(0.0, 0.9), t=st.floats(0, 50))
def test_K_identity_property(wb, frac, t):
    p = validate_params(wb, frac * 2 * wb / math.pi, 1.0)
    assert abs(K_factor(p, t) - K_oracle(p, t)) < 1e-12 * max(1.0, K_oracle(p, t))


def test_K_values():
    assert K_factor(P, -1.0) == 1.0
    assert np.array_equal(K_factor(P, np.array([-5.0, -1e-9])), [1.0, 1.0])
    k2 = 1 - math.pi ** 2 * 0.01 / 4
    expect = 1 / k2 + math.pi ** 2 * 0.01 * (2 - math.pi ** 2 * 0.01) / (8 * k2)
    assert abs(K_factor(P, 0.0) - expect) < 1e-12
    assert K_factor(P, 0.0) == pytest.approx(1.04934, abs=1e-5)
    env = [K_factor(P, t) / math.exp(-math.pi * 0.1 * t) for t in (20, 40, 80)]
    assert all(0 < e < 1.2 for e in env)
    assert K_factor(P, 20) > K_factor(P, 40) > K_factor(P, 80) > 0


def test_bath_channel_kernels_match_coefficients():
    # F and G are the squared moduli of the bath coefficients, up to g / omega_bar
    for t in (0.0, 0.7, 5.0):
        for w in (0.3, 0.99, 1.7, 6.0):
            pair = bogoliubov_closed(P, w, t)
            F = F_kernel(P, w, t) * P.g / P.omega_bar
            G = G_kernel(P, w, t) * P.g / P.omega_bar
            assert F == pytest.approx(abs(pair.alpha) ** 2 + abs(pair.beta) ** 2, rel=1e-10)
            assert G == pytest.approx(2 * abs(pair.beta) ** 2, rel=1e-9, abs=1e-15)


def test_closed_domain_errors():
    with pytest.raises(DomainError):
        bogoliubov_closed(P, "particle", -1.0)
    with pytest.raises(DomainError):
        bogoliubov_closed(P, 0.0, 1.0)


# ---- continuum occupation ---------------------------------------------------

def test_continuum_decoupled_and_domain():
    assert occupation_bare_continuum(P.with_(g=0.0, n0_initial=2.5), 7.0) == 2.5
    with pytest.raises(DomainError):
        occupation_bare_continuum(P, -0.1)


def test_continuum_asymptote_is_initial_independent():
    vals = [occupation_bare_continuum(P.with_(n0_initial=n0), 100.0) for n0 in (0.0, 1.0, 5.0)]
    assert max(vals) - min(vals) < 1e-3


def test_continuum_regression_values():
    # locked after cross-checking against finite cavities (R=60..120)
    assert occupation_bare_continuum(P, 1.0) == pytest.approx(0.7635070668, rel=1e-7)
    assert occupation_bare_continuum(P, 100.0) == pytest.approx(0.16194041, rel=1e-6)


def test_continuum_continuity():
    t = np.linspace(0.5, 30.0, 60)
    a = occupation_bare_continuum(P, t)
    b = occupation_bare_continuum(P, t + 1e-3)
    assert np.max(np.abs(a - b)) < 1e-2
    assert np.all(a > 0)


def test_thermal_integral_converges_with_tolerance():
    from oscbath.quadrature import QuadratureSpec
    lo = thermal_integral_bare(P, 3.0, QuadratureSpec(rel_tol=1e-7, abs_tol=1e-9)).value
    hi = thermal_integral_bare(P, 3.0, QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14)).value
    assert abs(lo - hi) < 1e-7


# ---- vacuum divergence -------------------------------------------------------

def test_divergence_probe_log_growth():
    lams = np.array([1e2, 1e3, 1e4])
    vals = np.array([vacuum_divergence_probe(P, 1.0, L) for L in lams])
    a, b = np.polyfit(np.log(lams), vals, 1)
    resid = vals - (a * np.log(lams) + b)
    assert a > 0
    assert np.max(np.abs(resid)) < 0.01 * (vals.max() - vals.min())
    assert a == pytest.approx(vacuum_slope(P, 1.0), rel=0.02)


@pytest.mark.parametrize("t", [0.0, 1.0])
def test_divergence_probe_doubling(t):
    # at t = 0 the kernel G vanishes identically, so the increment is zero
    a = vacuum_slope(P, t)
    assert a > 0
    lo = vacuum_divergence_probe(P, t, 1e3)
    hi = vacuum_divergence_probe(P, t, 2e3)
    assert (hi - lo) == pytest.approx(a * math.log(2), rel=0.02)


def test_divergence_probe_contract():
    assert vacuum_divergence_probe(P.with_(g=0.0), 1.0, 100.0) == 0.0
    with pytest.raises(DomainError):
        vacuum_divergence_probe(P, 1.0, 5.0)


# ---- traces -------------------------------------------------------------------

def test_traces(small_cavity):
    spec, T = small_cavity
    t = np.linspace(0.0, 5.0, 6)
    tr = trace_bare_finite(spec, T, P, t)
    assert tr.kind is OccupationKind.BARE_FINITE and tr.cavity_snapshot == spec.cavity
    tc = trace_bare_continuum(P, t[1:])
    assert tc.kind == "bare_continuum" and np.all(tc.values >= 0)
    with pytest.raises(ValueError):
        OccupationTrace(np.array([1.0, 1.0]), np.array([0.1, 0.2]), "bare_finite", P)
    with pytest.raises(ValueError):
        OccupationTrace(np.array([1.0, 2.0]), np.array([0.1, -0.2]), "bare_finite", P)
