import math

import numpy as np
import pytest

from lticap.capacity import DetectionScheme, capacity
from lticap.entropy import g_scalar
from lticap.filters import FilterStage, Flat, cascade
from lticap.oracle import (
    Amplifier,
    DiscreteModeProblem,
    PureLoss,
    SingleModeChannel,
    ThermalNoise,
    discrete_allocation,
    discrete_capacity,
    single_mode_capacity,
)
from lticap.physics import InvalidParameterError, PhysicalEnvironment

HOL, HOM, HET = DetectionScheme.HOLEVO, DetectionScheme.HOMODYNE, DetectionScheme.HETERODYNE


class TestSingleMode:
    def test_lossless_values(self):
        ch = SingleModeChannel(PureLoss(1.0), 1.0)
        assert single_mode_capacity(ch, HOL) == pytest.approx(2.0, rel=1e-15)
        assert single_mode_capacity(ch, HET) == pytest.approx(1.0, rel=1e-15)
        assert single_mode_capacity(ch, HOM) == pytest.approx(0.5 * math.log2(5.0), rel=1e-15)

    def test_thermal_example(self):
        ch = SingleModeChannel(ThermalNoise(0.5, 1.0), 1.0)
        assert single_mode_capacity(ch, "holevo") == pytest.approx(0.62255624891826572782, rel=1e-14)

    def test_amplifier(self):
        assert single_mode_capacity(SingleModeChannel(Amplifier(2.0), 0.0), HOL) == 0.0
        # kappa = 2, vacuum input: output noise 1, Holevo g(2 N + 1) - g(1)
        ch = SingleModeChannel(Amplifier(2.0), 3.0)
        assert single_mode_capacity(ch, HOL) == pytest.approx(g_scalar(7.0) - 2.0, rel=1e-14)
        assert single_mode_capacity(ch, HET) == pytest.approx(math.log2(1 + 6.0 / 2.0), rel=1e-15)

    @pytest.mark.parametrize("n", [1e-3, 0.1, 1.0, 10.0, 1e3])
    def test_holevo_dominates(self, n):
        for kind in (PureLoss(0.3), ThermalNoise(0.7, 2.0), Amplifier(5.0, 0.5)):
            ch = SingleModeChannel(kind, n)
            hol = single_mode_capacity(ch, HOL)
            assert hol >= single_mode_capacity(ch, HOM)
            assert hol >= single_mode_capacity(ch, HET)

    def test_pure_loss_ratios(self):
        big = SingleModeChannel(PureLoss(0.5), 1e12)
        assert single_mode_capacity(big, HET) / single_mode_capacity(big, HOL) == pytest.approx(1.0, abs=0.05)
        assert single_mode_capacity(big, HOM) / single_mode_capacity(big, HET) == pytest.approx(0.5, abs=0.05)
        # homodyne wins while eta N_S < 2 and loses beyond
        assert single_mode_capacity(SingleModeChannel(PureLoss(0.5), 3.9), HOM) > \
            single_mode_capacity(SingleModeChannel(PureLoss(0.5), 3.9), HET)
        assert single_mode_capacity(SingleModeChannel(PureLoss(0.5), 4.1), HOM) < \
            single_mode_capacity(SingleModeChannel(PureLoss(0.5), 4.1), HET)

    def test_validation(self):
        for bad in (lambda: PureLoss(0.0), lambda: PureLoss(1.5), lambda: ThermalNoise(0.5, -1.0),
                    lambda: Amplifier(1.0), lambda: Amplifier(math.inf),
                    lambda: SingleModeChannel(PureLoss(0.5), -1.0), lambda: SingleModeChannel("loss", 1.0)):
            with pytest.raises(InvalidParameterError):
                bad()


class TestDiscrete:
    def test_single_mode_problem(self):
        T, dT, P = 2e-9, 1e-10, 3e9
        G, S = 0.4, 0.2
        prob = DiscreteModeProblem(T, dT, [G], [S], P)
        N = P * (T + dT)
        ch = SingleModeChannel(ThermalNoise(G, S / (1 - G)), N)
        for scheme in DetectionScheme:
            rate = discrete_capacity(prob, scheme)
            assert rate == pytest.approx(single_mode_capacity(ch, scheme) / (T + dT), rel=1e-12)

    @pytest.mark.parametrize("scheme", list(DetectionScheme))
    def test_identical_modes_share_equally(self, scheme):
        prob = DiscreteModeProblem(1e-9, 1e-12, np.full(7, 0.25), np.full(7, 0.1), 1e10)
        n, _ = discrete_allocation(prob, scheme)
        np.testing.assert_allclose(n, prob.photons_per_frame / 7, rtol=1e-12)

    @pytest.mark.parametrize("scheme", list(DetectionScheme))
    def test_guard_band_factor(self, scheme):
        T, P = 1e-9, 5e10
        gains, noise = np.array([0.1, 0.5, 0.9]), np.array([0.0, 0.3, 1.0])
        r0 = discrete_capacity(DiscreteModeProblem(T, 1e-15 * T, gains, noise, P), scheme)
        dT = 0.25 * T
        # same photons per frame, longer frame
        r1 = discrete_capacity(DiscreteModeProblem(T, dT, gains, noise, P * T / (T + dT)), scheme)
        assert r1 / r0 == pytest.approx(T / (T + dT), rel=1e-9)

    @pytest.mark.parametrize("scheme", list(DetectionScheme))
    def test_equal_water_level(self, scheme):
        gains = np.array([0.05, 0.2, 0.9, 0.4, 0.01])
        noise = np.array([0.5, 0.1, 0.0, 2.0, 0.0])
        prob = DiscreteModeProblem(1e-9, 1e-12, gains, noise, 2e9)
        n, beta = discrete_allocation(prob, scheme)
        assert n.sum() == pytest.approx(prob.photons_per_frame, rel=1e-12)
        on = n > 0
        if scheme is HOL:
            # d/dn [g(G n + S)] = G log2(1 + 1/(G n + S)) equals beta/ln2 on the support
            marg = gains * np.log1p(1.0 / (gains * n + noise))
            np.testing.assert_allclose(marg[on], beta, rtol=1e-9)
            assert np.all(gains[~on] * np.log1p(1.0 / noise[~on]) <= beta)
        elif scheme is HET:
            np.testing.assert_allclose(n[on] + (noise[on] + 1) / gains[on], beta, rtol=1e-12)
        else:
            np.testing.assert_allclose(n[on] + (2 * noise[on] + 1) / (4 * gains[on]), beta / 2, rtol=1e-12)

    def test_zero_budget(self):
        prob = DiscreteModeProblem(1e-9, 1e-12, [1.0, 1.0, 1.0], [0.0, 0.0, 0.0], 0.0)
        assert discrete_capacity(prob, HOL) == 0.0

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            DiscreteModeProblem(1e-9, 1e-12, [1.0, 1.0], [0.0, 0.0], 1.0)
        with pytest.raises(InvalidParameterError):
            DiscreteModeProblem(0.0, 1e-12, [1.0], [0.0], 1.0)
        with pytest.raises(InvalidParameterError):
            DiscreteModeProblem(1e-9, 1e-12, [-1.0], [0.0], 1.0)
        with pytest.raises(InvalidParameterError):
            discrete_allocation(DiscreteModeProblem(1e-9, 1e-12, [0.0], [0.0], 1.0), HOL)

    @pytest.mark.parametrize("scheme", list(DetectionScheme))
    def test_flat_channel_converges_to_continuum(self, scheme):
        env = PhysicalEnvironment.from_wavelength(1550e-9, 0.0)
        B = 10e9
        # off-centre band edges: the mode count overshoots B T_s by 1/2
        ch = cascade([FilterStage(Flat.from_hz(B), -3.0)], env)
        P = 4e10
        cont = capacity(ch, scheme, P)[0]
        gaps = []
        for m in (10.25, 100.25, 1000.25):
            T = m / (B / 2)
            prob = DiscreteModeProblem.from_channel(ch, P, T, 1e-9 * T)
            gaps.append(abs(discrete_capacity(prob, scheme) - cont) / cont)
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 2e-3
