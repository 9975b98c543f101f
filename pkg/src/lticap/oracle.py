"""Ground-truth capacities used to validate the continuous solvers.

Two independent routes:

* closed-form single-mode capacities of the pure-loss, thermal-noise and
  amplifying channels;
* a discrete-mode problem, obtained by sampling the channel at the Fourier
  frequencies ``2 pi k / T_s`` of a finite symbol, solved with plain sums
  and its own multiplier bisection.

Nothing here touches the quadrature or bracketing code of
:mod:`lticap.capacity`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .capacity import DetectionScheme
from .entropy import g_scalar
from .physics import InvalidParameterError

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class PureLoss:
    eta: float

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise InvalidParameterError(f"transmissivity must lie in (0, 1], got {self.eta!r}")

    gain = property(lambda self: self.eta)
    injected_noise = property(lambda self: 0.0)


@dataclass(frozen=True)
class ThermalNoise:
    eta: float
    n_env: float

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise InvalidParameterError(f"transmissivity must lie in (0, 1], got {self.eta!r}")
        if not (math.isfinite(self.n_env) and self.n_env >= 0.0):
            raise InvalidParameterError(f"environment occupancy must be >= 0, got {self.n_env!r}")

    gain = property(lambda self: self.eta)
    injected_noise = property(lambda self: (1.0 - self.eta) * self.n_env)


@dataclass(frozen=True)
class Amplifier:
    kappa: float
    n_env: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa > 1.0):
            raise InvalidParameterError(f"amplifier gain must be finite and > 1, got {self.kappa!r}")
        if not (math.isfinite(self.n_env) and self.n_env >= 0.0):
            raise InvalidParameterError(f"environment occupancy must be >= 0, got {self.n_env!r}")

    gain = property(lambda self: self.kappa)
    injected_noise = property(lambda self: (self.kappa - 1.0) * (self.n_env + 1.0))


@dataclass(frozen=True)
class SingleModeChannel:
    kind: object
    n_s: float

    def __post_init__(self):
        if not isinstance(self.kind, (PureLoss, ThermalNoise, Amplifier)):
            raise InvalidParameterError(f"unsupported single-mode channel {self.kind!r}")
        if not (math.isfinite(self.n_s) and self.n_s >= 0.0):
            raise InvalidParameterError(f"mean photon number must be >= 0, got {self.n_s!r}")


def single_mode_capacity(ch, scheme):
    """Capacity in bits per channel use.

    Holevo: ``g(G N_S + S) - g(S)``. Homodyne: ``log2(1 + 4 G N_S/(2S+1)) / 2``.
    Heterodyne: ``log2(1 + G N_S/(S+1))``. Here G is the power gain and S the
    injected noise photons of the channel kind.
    """
    scheme = DetectionScheme.parse(scheme)
    G = ch.kind.gain
    S = ch.kind.injected_noise
    n = ch.n_s
    if scheme is DetectionScheme.HOLEVO:
        return max(g_scalar(G * n + S) - g_scalar(S), 0.0)
    if scheme is DetectionScheme.HOMODYNE:
        return 0.5 * math.log1p(4.0 * G * n / (2.0 * S + 1.0)) / _LN2
    return math.log1p(G * n / (S + 1.0)) / _LN2


@dataclass(frozen=True, eq=False)
class DiscreteModeProblem:
    """Modes ``k = -K..K`` of one symbol of length ``T_s`` plus guard band."""

    symbol_duration: float
    guard_band: float
    gains: np.ndarray
    noise: np.ndarray
    flux: float

    def __post_init__(self):
        if not (self.symbol_duration > 0.0 and self.guard_band > 0.0):
            raise InvalidParameterError("symbol duration and guard band must be > 0")
        gains = np.asarray(self.gains, dtype=np.float64)
        noise = np.asarray(self.noise, dtype=np.float64)
        if gains.shape != noise.shape or gains.ndim != 1 or gains.size % 2 != 1:
            raise InvalidParameterError("gains and noise must be matching 1-D arrays of odd length 2K+1")
        if np.any(gains < 0.0) or np.any(noise < 0.0):
            raise InvalidParameterError("per-mode gains and noise must be >= 0")
        if not (math.isfinite(self.flux) and self.flux >= 0.0):
            raise InvalidParameterError("flux budget must be finite and >= 0")
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "noise", noise)

    @property
    def max_index(self):
        return (self.gains.size - 1) // 2

    @property
    def frame(self):
        return self.symbol_duration + self.guard_band

    @property
    def photons_per_frame(self):
        return self.flux * self.frame

    @classmethod
    def from_channel(cls, channel, flux, symbol_duration, guard_band, max_index=None):
        """Sample a channel at ``w_k = 2 pi k / T_s`` out to its support hint."""
        if max_index is None:
            max_index = int(math.ceil(channel.support_hint() * symbol_duration / (2.0 * math.pi)))
        k = np.arange(-max_index, max_index + 1, dtype=np.float64)
        h2, sn = channel.spectra(2.0 * math.pi * k / symbol_duration)
        return cls(symbol_duration, guard_band, h2, sn, flux)


def _g(x):
    # (1+x) ln(1+x) - x ln x, written differently from the production kernel
    x = np.asarray(x, dtype=np.float64)
    xlogx = np.zeros_like(x)
    pos = x > 0.0
    xlogx[pos] = x[pos] * np.log(x[pos])
    return ((1.0 + x) * np.log1p(x) - xlogx) / _LN2


def _mode_allocation(gains, noise, beta, scheme):
    n = np.zeros_like(gains)
    on = gains > 0.0
    G, S = gains[on], noise[on]
    if scheme is DetectionScheme.HOLEVO:
        with np.errstate(over="ignore"):
            level = 1.0 / np.expm1(beta / G)
        n[on] = np.maximum((level - S) / G, 0.0)
    elif scheme is DetectionScheme.HOMODYNE:
        n[on] = np.maximum(beta / 2.0 - (2.0 * S + 1.0) / (4.0 * G), 0.0)
    else:
        n[on] = np.maximum(beta - (S + 1.0) / G, 0.0)
    return n


def _mode_rates(gains, noise, n, scheme):
    if scheme is DetectionScheme.HOLEVO:
        return _g(gains * n + noise) - _g(noise)
    if scheme is DetectionScheme.HOMODYNE:
        return 0.5 * np.log1p(4.0 * gains * n / (2.0 * noise + 1.0)) / _LN2
    return np.log1p(gains * n / (noise + 1.0)) / _LN2


def discrete_allocation(prob, scheme, rtol=1e-13):
    """Per-mode photon numbers spending the frame budget; returns ``(n, beta)``."""
    scheme = DetectionScheme.parse(scheme)
    N = prob.photons_per_frame
    G, S = prob.gains, prob.noise
    if N == 0.0:
        return np.zeros_like(G), math.nan
    if not np.any(G > 0.0):
        raise InvalidParameterError("no mode transmits; the discrete problem is infeasible")
    total = lambda b: float(np.sum(_mode_allocation(G, S, b, scheme)))

    if scheme is DetectionScheme.HOLEVO:
        # spent photons fall as beta rises; bracket in log space
        lo = hi = 1.0
        while total(hi) > N:
            hi *= 2.0
        while total(lo) < N:
            lo *= 0.5
            if lo < 1e-300:
                raise InvalidParameterError("could not bracket the discrete Holevo multiplier")
        for _ in range(400):
            mid = math.sqrt(lo * hi)
            if not lo < mid < hi:
                break
            t = total(mid)
            if abs(t - N) <= rtol * N:
                lo = hi = mid
                break
            if t > N:
                lo = mid
            else:
                hi = mid
        beta = 0.5 * (lo + hi)
    else:
        on = G > 0.0
        if scheme is DetectionScheme.HOMODYNE:
            floors = 2.0 * (2.0 * S[on] + 1.0) / (4.0 * G[on])
            lo, hi = floors.min(), 2.0 * (floors.min() / 2.0 + N)
        else:
            floors = (S[on] + 1.0) / G[on]
            lo, hi = floors.min(), floors.min() + N
        for _ in range(400):
            mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                break
            t = total(mid)
            if abs(t - N) <= rtol * N:
                lo = hi = mid
                break
            if t < N:
                lo = mid
            else:
                hi = mid
        beta = 0.5 * (lo + hi)
    return _mode_allocation(G, S, beta, scheme), beta


def discrete_capacity(prob, scheme):
    """Information rate in bits/s of the discretized channel at its flux budget."""
    scheme = DetectionScheme.parse(scheme)
    n, _ = discrete_allocation(prob, scheme)
    if not np.any(n > 0.0):
        return 0.0
    return float(np.sum(_mode_rates(prob.gains, prob.noise, n, scheme))) / prob.frame
