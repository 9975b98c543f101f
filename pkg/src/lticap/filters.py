"""Filter stages, their minimum thermal noise, and cascades of stages.

All detunings here are angular (rad/s). Peak gains are in dB of power, so
a -20 dB stage has ``|H(0)|**2 = 0.01``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .physics import InvalidParameterError, PhysicalEnvironment

TWO_PI = 2.0 * math.pi
# ratio |H(W)|^2 / peak below which a detuning is treated as out of band
SUPPORT_RATIO = 1e-12


@dataclass(frozen=True)
class Butterworth4:
    """Fourth-order Butterworth low-pass shape.

    By default the magnitude is ``1/(1 + (w/wc)**8)``; with
    ``conventional=True`` it is the textbook ``1/sqrt(1 + (w/wc)**8)``.
    """

    cutoff: float
    conventional: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.cutoff) and self.cutoff > 0.0):
            raise InvalidParameterError(f"Butterworth cutoff must be finite and > 0, got {self.cutoff!r}")

    @classmethod
    def from_hz(cls, cutoff_hz, conventional=False):
        return cls(TWO_PI * cutoff_hz, conventional)

    def normalized_sq(self, omega, h0sq=1.0):
        return kernels.butterworth_sq(np.asarray(omega, dtype=np.float64), self.cutoff, h0sq, self.conventional)

    def support_hint(self):
        if self.conventional:
            return self.cutoff * (1.0 / SUPPORT_RATIO - 1.0) ** 0.125
        return self.cutoff * (1.0 / math.sqrt(SUPPORT_RATIO) - 1.0) ** 0.125

    def breakpoints(self, h0):
        # where the stage passes through unit gain; the noise spectrum kinks there
        if h0 <= 1.0:
            return []
        excess = h0 * h0 - 1.0 if self.conventional else h0 - 1.0
        return [self.cutoff * excess**0.125]


@dataclass(frozen=True)
class Flat:
    """Brick-wall pass band of total width ``bandwidth`` rad/s centered on 0."""

    bandwidth: float

    def __post_init__(self):
        if not (math.isfinite(self.bandwidth) and self.bandwidth > 0.0):
            raise InvalidParameterError(f"flat bandwidth must be finite and > 0, got {self.bandwidth!r}")

    @classmethod
    def from_hz(cls, bandwidth_hz):
        return cls(TWO_PI * bandwidth_hz)

    def normalized_sq(self, omega, h0sq=1.0):
        omega = np.asarray(omega, dtype=np.float64)
        return np.where(np.abs(omega) <= 0.5 * self.bandwidth, h0sq, 0.0)

    def support_hint(self):
        return 0.5 * self.bandwidth

    def breakpoints(self, h0):
        return [0.5 * self.bandwidth]


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Magnitude response sampled on nonnegative detunings.

    The magnitude is linearly interpolated, mirrored to negative detuning
    and zero beyond the last grid point. Magnitudes are rescaled so the
    largest equals 1.
    """

    detuning: np.ndarray
    magnitude: np.ndarray

    def __post_init__(self):
        w = np.array(self.detuning, dtype=np.float64)
        m = np.array(self.magnitude, dtype=np.float64)
        if w.ndim != 1 or w.shape != m.shape or w.size < 2:
            raise InvalidParameterError("tabulated response needs matching 1-D arrays with at least 2 points")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(m))):
            raise InvalidParameterError("tabulated response must be finite")
        if np.any(np.diff(w) <= 0.0):
            raise InvalidParameterError("tabulated detuning grid must be strictly increasing")
        if w[0] < 0.0:
            raise InvalidParameterError("tabulated detuning grid must start at a nonnegative detuning")
        if np.any(m < 0.0) or np.any(m > 1.0):
            raise InvalidParameterError("tabulated magnitudes must lie in [0, 1]")
        peak = m.max()
        if peak <= 0.0:
            raise InvalidParameterError("tabulated magnitudes are all zero")
        w.setflags(write=False)
        m = m / peak
        m.setflags(write=False)
        object.__setattr__(self, "detuning", w)
        object.__setattr__(self, "magnitude", m)

    @classmethod
    def from_hz(cls, detuning_hz, magnitude):
        return cls(TWO_PI * np.asarray(detuning_hz, dtype=np.float64), magnitude)

    def normalized_sq(self, omega, h0sq=1.0):
        a = np.abs(np.asarray(omega, dtype=np.float64))
        mag = np.interp(a, self.detuning, self.magnitude, left=self.magnitude[0], right=0.0)
        mag = np.where((a < self.detuning[0]) | (a > self.detuning[-1]), 0.0, mag)
        return h0sq * mag * mag

    def support_hint(self):
        return float(self.detuning[-1])

    def breakpoints(self, h0):
        return [float(w) for w in self.detuning]


@dataclass(frozen=True)
class FilterStage:
    """One attenuating or amplifying filter with its peak power gain in dB."""

    shape: object
    peak_gain_db: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.peak_gain_db):
            raise InvalidParameterError(f"peak gain must be finite, got {self.peak_gain_db!r}")

    @property
    def peak_amplitude(self):
        """H0 = 10**(dB/20)."""
        return 10.0 ** (self.peak_gain_db / 20.0)

    @property
    def peak_power_gain(self):
        return 10.0 ** (self.peak_gain_db / 10.0)

    def squared_magnitude(self, omega):
        return self.shape.normalized_sq(omega, self.peak_power_gain)

    def magnitude(self, omega):
        return np.sqrt(self.squared_magnitude(omega))

    def noise_spectrum(self, env, omega):
        h2 = np.asarray(self.squared_magnitude(omega), dtype=np.float64)
        return kernels.stage_noise(h2, env.thermal_occupancy, env.thermal_occupancy_plus_one)

    def support_hint(self):
        return self.shape.support_hint()

    def breakpoints(self):
        return self.shape.breakpoints(self.peak_amplitude)


def stage_magnitude(stage, omega):
    """|H(w)| of a single stage; scalar in, scalar out."""
    out = stage.magnitude(np.atleast_1d(omega))
    return float(out[0]) if np.ndim(omega) == 0 else out


def stage_noise_spectrum(stage, env, omega):
    """Minimum thermal noise spectrum S_N(w) injected by one stage.

    ``(1 - |H|^2) N_T`` where the stage attenuates and
    ``(|H|^2 - 1)(N_T + 1)`` where it amplifies, chosen per detuning.
    """
    out = stage.noise_spectrum(env, np.atleast_1d(np.asarray(omega, dtype=np.float64)))
    return float(out[0]) if np.ndim(omega) == 0 else out


@dataclass(frozen=True)
class ChannelModel:
    """Effective channel of a stage cascade: |H(w)|^2 and S_N(w).

    ``components`` holds :class:`FilterStage` objects or nested
    :class:`ChannelModel` instances, applied in order from the transmitter.
    """

    components: tuple
    env: PhysicalEnvironment
    _hint: float = field(init=False, repr=False)

    def __post_init__(self):
        if not self.components:
            raise InvalidParameterError("a channel needs at least one stage")
        object.__setattr__(self, "_hint", min(c.support_hint() for c in self.components))

    def spectra(self, omega):
        """Return ``(|H|^2, S_N)`` as float64 arrays over ``omega`` (rad/s)."""
        omega = np.atleast_1d(np.asarray(omega, dtype=np.float64))
        h2_rows, sn_rows = [], []
        for comp in self.components:
            if isinstance(comp, ChannelModel):
                h2k, snk = comp.spectra(omega)
            else:
                h2k = np.asarray(comp.squared_magnitude(omega), dtype=np.float64)
                snk = kernels.stage_noise(h2k, self.env.thermal_occupancy, self.env.thermal_occupancy_plus_one)
            h2_rows.append(h2k)
            sn_rows.append(snk)
        return kernels.cascade_accumulate(np.vstack(h2_rows), np.vstack(sn_rows))

    def squared_magnitude(self, omega):
        h2, _ = self.spectra(omega)
        return float(h2[0]) if np.ndim(omega) == 0 else h2

    def noise_spectrum(self, omega):
        _, sn = self.spectra(omega)
        return float(sn[0]) if np.ndim(omega) == 0 else sn

    def support_hint(self):
        return self._hint

    def breakpoints(self):
        """Nonnegative detunings where the spectra may have kinks or jumps."""
        pts = set()
        for comp in self.components:
            pts.update(comp.breakpoints())
        return sorted(p for p in pts if p >= 0.0)


def cascade(stages, env):
    """Compose stages into one :class:`ChannelModel`.

    The noise follows ``S_k = |H_k|^2 S_{k-1} + S_{N_k}`` with ``S_0 = 0``;
    the transfer is the product of the stage responses.
    """
    stages = tuple(stages)
    if not stages:
        raise InvalidParameterError("cascade needs at least one stage")
    return ChannelModel(stages, env)
