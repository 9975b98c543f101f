import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from lticap import kernels
from lticap.capacity import (
    DetectionScheme,
    SolverConfig,
    SolverError,
    capacity,
    classical_allocation,
    hsw_allocation,
    measurement_noise_spectrum,
    refinement_check,
    solve_flux_constraint,
)
from lticap.entropy import g
from lticap.filters import Butterworth4, FilterStage, Flat, Tabulated, cascade
from lticap.physics import InvalidParameterError, PhysicalEnvironment

HOL, HOM, HET = DetectionScheme.HOLEVO, DetectionScheme.HOMODYNE, DetectionScheme.HETERODYNE
WC = 2 * math.pi * 20e9


@pytest.fixture(scope="module")
def cold():
    return PhysicalEnvironment.from_wavelength(1550e-9, 0.0)


def flat_channel(env, bandwidth_hz, eta=1.0):
    return cascade([FilterStage(Flat.from_hz(bandwidth_hz), 10 * math.log10(eta))], env)


def riemann_flux(sol, n=400_001):
    """Independent check: midpoint sum of the allocation on a fixed grid."""
    edge = sol.support_edge
    w = np.linspace(-edge, edge, n)
    h = w[1] - w[0]
    mids = 0.5 * (w[1:] + w[:-1])
    return float(np.sum(sol.allocation(mids))) * h / (2 * math.pi)


class TestMeasurementNoise:
    def test_vacuum_floors(self):
        assert measurement_noise_spectrum(0.0, HOM) == 0.25
        assert measurement_noise_spectrum(0.0, HET) == 0.5

    def test_substitution(self):
        assert measurement_noise_spectrum(3.0, "homodyne") == 1.75
        np.testing.assert_allclose(measurement_noise_spectrum(np.array([1.0, 3.0]), HET), [1.0, 2.0])

    def test_holevo_rejected(self):
        with pytest.raises(InvalidParameterError):
            measurement_noise_spectrum(1.0, HOL)

    def test_unknown_scheme(self):
        with pytest.raises(InvalidParameterError):
            DetectionScheme.parse("direct")


class TestAllocations:
    def test_hsw_unit_channel(self, cold):
        ch = flat_channel(cold, 1e9)
        assert hsw_allocation(ch, math.log(2.0), 0.0) == pytest.approx(1.0, rel=1e-15)
        assert hsw_allocation(ch, 1e6, 0.0) == 0.0

    def test_hsw_threshold_boundary(self, cell_env):
        ch = cascade([FilterStage(Flat(1e12), -20.0)], cell_env)
        sn = ch.noise_spectrum(0.0)
        # root of 1/(e^{100 b} - 1) = S_N found independently with a bracketing solver
        beta_star = brentq(lambda b: math.log(1.0 / math.expm1(100.0 * b)) - math.log(sn), 0.01, 1.0, xtol=1e-16)
        assert hsw_allocation(ch, beta_star * (1 + 1e-9), 0.0) == 0.0
        inside = hsw_allocation(ch, beta_star * (1 - 1e-9), 0.0)
        # first order: n ~ y (1+y) (beta/h2) dbeta / h2 ~ 1e-19
        assert 0.0 < inside < 1e-18
        assert abs(hsw_allocation(ch, beta_star, 0.0)) < 1e-25

    def test_hsw_decreasing_in_beta(self, config1):
        w = np.linspace(0, 2 * WC, 301)
        a = hsw_allocation(config1, 1e-3, w)
        b = hsw_allocation(config1, 2e-3, w)
        on = a > 0
        assert np.all(b[on] < a[on]) and np.all(b[~on] == 0)

    def test_bad_beta(self, config1):
        for bad in (0.0, -1.0, math.nan):
            with pytest.raises(InvalidParameterError):
                hsw_allocation(config1, bad, 0.0)
            with pytest.raises(InvalidParameterError):
                classical_allocation(config1, HOM, bad, 0.0)
        with pytest.raises(InvalidParameterError):
            classical_allocation(config1, HOL, 1.0, 0.0)

    def test_flat_channel_constant(self, cell_env):
        ch = flat_channel(cell_env, 10e9, 0.3)
        w = 2 * math.pi * np.linspace(-4.9e9, 4.9e9, 50)
        for scheme in (HOM, HET):
            n = classical_allocation(ch, scheme, 20.0, w)
            assert np.all(n > 0) and np.ptp(n) == 0.0

    def test_water_level_touch(self, config2):
        w_star = 0.7 * WC
        s_hom = measurement_noise_spectrum(config2.noise_spectrum(w_star), HOM)
        beta = 2 * s_hom / config2.squared_magnitude(w_star)
        assert classical_allocation(config2, HOM, beta, w_star) == pytest.approx(0.0, abs=1e-12 * beta)

    def test_heterodyne_support_is_growing_interval(self, config1):
        w = np.linspace(0, 3 * WC, 6001)
        edges = []
        for beta in (150.0, 1e3, 1e4, 1e5):
            on = classical_allocation(config1, HET, beta, w) > 0
            k = np.flatnonzero(~on)[0]
            assert on[:k].all() and not on[k:].any()
            edges.append(w[k])
        assert np.all(np.diff(edges) > 0)

    def test_nondecreasing_in_beta(self, config1):
        w = np.linspace(0, 3 * WC, 301)
        for scheme in (HOM, HET):
            lo = classical_allocation(config1, scheme, 300.0, w)
            hi = classical_allocation(config1, scheme, 301.0, w)
            assert np.all(hi >= lo)


class TestSolver:
    def test_flat_uniform_holevo(self, cold):
        B, P = 5e9, 2e10
        sol = solve_flux_constraint(flat_channel(cold, B), HOL, P)
        # n = P/B in every mode, so beta = ln(1 + B/P)
        assert sol.lagrange_multiplier == pytest.approx(math.log1p(B / P), rel=1e-8)
        np.testing.assert_allclose(sol.allocation(2 * math.pi * np.linspace(-2e9, 2e9, 9)), P / B, rtol=1e-8)
        assert sol.support_hz == pytest.approx(B, rel=1e-12)

    @pytest.mark.parametrize("scheme", list(DetectionScheme))
    def test_zero_flux(self, config1, scheme):
        cap, sol = capacity(config1, scheme, 0.0)
        assert cap == 0.0 and sol.achieved_flux == 0.0 and not sol.degenerate

    @pytest.mark.parametrize("scheme", list(DetectionScheme))
    def test_vanishing_flux(self, config2, scheme):
        caps, edges = [], []
        for P in (1e6, 1e3, 1.0):
            cap, sol = capacity(config2, scheme, P)
            caps.append(cap)
            edges.append(sol.support_edge)
            # near the floor the flux may only be matchable to a few ulps of beta
            rel = abs(sol.achieved_flux - P) / P
            assert rel <= 1e-9 or (sol.degenerate and rel < 1e-2)
        assert caps[0] > caps[1] > caps[2] > 0
        assert caps[2] < 1e-5 * caps[0]
        assert edges[0] >= edges[1] >= edges[2]

    @pytest.mark.parametrize("scheme", list(DetectionScheme))
    def test_flux_matches_independent_sum(self, config1, scheme):
        P = 1e12
        sol = solve_flux_constraint(config1, scheme, P)
        assert abs(sol.achieved_flux - P) <= 1e-9 * P
        assert riemann_flux(sol) == pytest.approx(sol.achieved_flux, rel=1e-6)

    def test_multi_interval_support(self, cell_env):
        # a notch at mid-band splits the Holevo allocation into two bands
        det = np.linspace(0.0, 3 * WC, 31)
        mag = np.where(np.abs(det - 1.5 * WC) < 0.4 * WC, 1e-3, 1.0)
        mag[-1] = 0.0
        ch = cascade([FilterStage(Tabulated(det, mag), -10.0)], cell_env)
        sol = solve_flux_constraint(ch, HOL, 1e11)
        positive = [(a, b) for a, b in sol.support if b > 0]
        assert len(positive) == 2
        assert riemann_flux(sol, 2_000_001) == pytest.approx(sol.achieved_flux, rel=1e-5)

    def test_bracket_failure_reports_bracket(self, config1):
        with pytest.raises(SolverError) as err:
            solve_flux_constraint(config1, HOL, 1e15, SolverConfig(max_bisection_iters=1))
        assert err.value.bracket is not None

    def test_no_transmission_is_degenerate(self, cell_env):
        # window far outside the pass band: nothing can be allocated
        ch = flat_channel(cell_env, 1e9)
        cfg = SolverConfig(frequency_window_override=1.0, max_bisection_iters=20)
        ch_off = cascade([FilterStage(Tabulated(np.array([1e12, 2e12]), np.array([1.0, 1.0])), 0.0)], cell_env)
        sol = solve_flux_constraint(ch_off, HET, 1e9, cfg)
        assert sol.degenerate and sol.capacity == 0.0
        assert solve_flux_constraint(ch, HET, 1e9).capacity > 0

    def test_invalid_flux(self, config1):
        for bad in (-1.0, math.nan, math.inf):
            with pytest.raises(InvalidParameterError):
                solve_flux_constraint(config1, HOL, bad)

    def test_solver_config_validation(self):
        for kwargs in (dict(flux_tolerance_rel=0.0), dict(quadrature_tolerance_rel=1.0),
                       dict(max_bisection_iters=0), dict(bracket_growth_factor=1.0),
                       dict(frequency_window_override=-1.0)):
            with pytest.raises(InvalidParameterError):
                SolverConfig(**kwargs)


class TestCapacity:
    @pytest.mark.parametrize("eta", [0.2, 1.0])
    def test_flat_pure_loss_closed_forms(self, cold, eta):
        B, P = 8e9, 3e10
        ch = flat_channel(cold, B, eta)
        x = eta * P / B
        assert capacity(ch, HOL, P)[0] == pytest.approx(B * g(x), rel=1e-8)
        assert capacity(ch, HOM, P)[0] == pytest.approx(0.5 * B * math.log2(1 + 4 * x), rel=1e-8)
        assert capacity(ch, HET, P)[0] == pytest.approx(B * math.log2(1 + x), rel=1e-8)

    @pytest.mark.parametrize("P", [1e10, 1e12, 1e14])
    def test_holevo_is_ultimate(self, config1, config2, P):
        for ch in (config1, config2):
            hol = capacity(ch, HOL, P)[0]
            assert hol >= capacity(ch, HOM, P)[0]
            assert hol >= capacity(ch, HET, P)[0]

    def test_heterodyne_beats_homodyne_at_high_snr(self, config1, config2):
        for ch in (config1, config2):
            for P in (1e11, 1e13, 1e15):
                assert capacity(ch, HET, P)[0] > capacity(ch, HOM, P)[0]

    def test_homodyne_beats_heterodyne_at_low_snr(self, config1, cold):
        # photon-starved regime: the homodyne vacuum floor is half the heterodyne one
        assert capacity(config1, HOM, 1e9)[0] > capacity(config1, HET, 1e9)[0]
        ch = flat_channel(cold, 1e10)
        assert capacity(ch, HOM, 1e9)[0] > capacity(ch, HET, 1e9)[0]

    @pytest.mark.parametrize("scheme", list(DetectionScheme))
    def test_monotone_and_concave_in_flux(self, config2, scheme):
        P = np.geomspace(1e9, 1e15, 13)
        C = np.array([capacity(config2, scheme, p)[0] for p in P])
        slopes = np.diff(C) / np.diff(P)
        assert np.all(slopes > 0)
        assert np.all(np.diff(slopes) <= 1e-7 * slopes[:-1])

    @pytest.mark.parametrize("scheme", list(DetectionScheme))
    def test_grid_refinement(self, config1, scheme):
        cfg = SolverConfig()
        sol = solve_flux_constraint(config1, scheme, 1e13, cfg)
        (flux, cap), (flux2, cap2) = refinement_check(sol, cfg)
        assert abs(cap2 - cap) <= 10 * cfg.quadrature_tolerance_rel * cap
        assert abs(flux2 - flux) <= 10 * cfg.quadrature_tolerance_rel * flux

    @pytest.mark.parametrize("scheme", list(DetectionScheme))
    def test_backends_agree(self, config1, scheme):
        if len(kernels.available_backends()) < 2:
            pytest.skip("compiled kernels not built")
        before = kernels.BACKEND
        try:
            out = {}
            for name in kernels.available_backends():
                kernels.set_backend(name)
                out[name] = capacity(config1, scheme, 1e12)[0]
        finally:
            kernels.set_backend(before)
        assert out["compiled"] == pytest.approx(out["python"], rel=1e-10)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(-15.0, 0.0), st.floats(0.0, 25.0), st.floats(0.3, 3.0), st.floats(9.0, 14.0))
    def test_holevo_dominates_random_cells(self, att_db, amp_db, width, log_p):
        env = PhysicalEnvironment.from_wavelength(1550e-9, 300.0)
        ch = cascade([FilterStage(Butterworth4(WC), att_db),
                      FilterStage(Butterworth4(width * WC, True), amp_db)], env)
        P = 10.0**log_p
        hol = capacity(ch, HOL, P)[0]
        assert hol >= capacity(ch, HOM, P)[0] * (1 - 1e-9)
        assert hol >= capacity(ch, HET, P)[0] * (1 - 1e-9)
