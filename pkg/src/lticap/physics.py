"""Physical constants and the thermal environment of the channel."""

import math
from dataclasses import dataclass

# CODATA 2018 (exact SI values for h, k_B, c)
PLANCK = 6.62607015e-34
HBAR = PLANCK / (2.0 * math.pi)
BOLTZMANN = 1.380649e-23
SPEED_OF_LIGHT = 299792458.0

# exp(-x) is the occupancy to full precision once x exceeds this
_LARGE_EXPONENT = 700.0


class InvalidParameterError(ValueError):
    """Raised when a physical or numerical parameter is out of range."""


@dataclass(frozen=True)
class PhysicalEnvironment:
    """Carrier frequency (rad/s) and reservoir temperature (K)."""

    carrier_angular_frequency: float
    temperature: float = 0.0

    def __post_init__(self):
        w0 = self.carrier_angular_frequency
        if not (math.isfinite(w0) and w0 > 0.0):
            raise InvalidParameterError(f"carrier angular frequency must be finite and > 0, got {w0!r}")
        t = self.temperature
        if not (math.isfinite(t) and t >= 0.0):
            raise InvalidParameterError(f"temperature must be finite and >= 0, got {t!r}")

    @classmethod
    def from_wavelength(cls, wavelength, temperature=0.0):
        """Build from a vacuum wavelength in meters."""
        if not (math.isfinite(wavelength) and wavelength > 0.0):
            raise InvalidParameterError(f"wavelength must be finite and > 0, got {wavelength!r}")
        return cls(2.0 * math.pi * SPEED_OF_LIGHT / wavelength, temperature)

    @classmethod
    def from_frequency(cls, carrier_hz, temperature=0.0):
        return cls(2.0 * math.pi * carrier_hz, temperature)

    @classmethod
    def with_occupancy(cls, carrier_angular_frequency, occupancy):
        """Pick the temperature that yields a requested thermal occupancy."""
        if occupancy < 0.0 or not math.isfinite(occupancy):
            raise InvalidParameterError(f"occupancy must be finite and >= 0, got {occupancy!r}")
        if occupancy == 0.0:
            return cls(carrier_angular_frequency, 0.0)
        x = math.log1p(1.0 / occupancy)
        return cls(carrier_angular_frequency, HBAR * carrier_angular_frequency / (BOLTZMANN * x))

    @property
    def photon_energy_ratio(self):
        """hbar*w0 / (k_B T); infinite at T = 0."""
        if self.temperature == 0.0:
            return math.inf
        return HBAR * self.carrier_angular_frequency / (BOLTZMANN * self.temperature)

    @property
    def thermal_occupancy(self):
        return thermal_occupancy(self)

    @property
    def thermal_occupancy_plus_one(self):
        """N_T + 1 = 1/(1 - exp(-hbar*w0/k_B T)), computed without cancellation."""
        x = self.photon_energy_ratio
        if math.isinf(x):
            return 1.0
        return -1.0 / math.expm1(-x)


def thermal_occupancy(env):
    """Mean photon number of a thermal mode at the carrier frequency.

    Returns exactly 0 at T = 0. The occupancy is evaluated at the carrier
    only, which is valid while the signal band is narrow next to w0.
    """
    w0 = env.carrier_angular_frequency
    if not (math.isfinite(w0) and w0 > 0.0):
        raise InvalidParameterError(f"carrier angular frequency must be finite and > 0, got {w0!r}")
    x = env.photon_energy_ratio
    if math.isinf(x):
        return 0.0
    if x > _LARGE_EXPONENT:
        return math.exp(-x)
    return 1.0 / math.expm1(x)
