"""Water-filling capacity solvers for the Holevo, homodyne and heterodyne schemes.

Each solve finds the Lagrange multiplier whose allocation spends exactly the
photon-flux budget, then integrates the capacity density over detuning with
the measure dw/2pi. Public fluxes are photons/s, capacities bits/s and
detunings rad/s unless a name ends in ``_hz``.
"""

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .physics import InvalidParameterError
from .quadrature import fixed_panels, integrate

log = logging.getLogger(__name__)

# |H|^2 at or below this is excluded from allocation outright
GAIN_FLOOR = 1e-30
EDGE_SCAN_POINTS = 4096


class DetectionScheme(enum.Enum):
    HOLEVO = "holevo"
    HOMODYNE = "homodyne"
    HETERODYNE = "heterodyne"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise InvalidParameterError(
                f"unknown scheme {name!r}; expected one of {[s.value for s in cls]}"
            ) from None


_CLASSICAL_CODE = {DetectionScheme.HOMODYNE: 1, DetectionScheme.HETERODYNE: 2}


class SolverError(RuntimeError):
    """The Lagrange-multiplier search failed; ``bracket`` holds the last (lo, hi)."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


@dataclass(frozen=True)
class SolverConfig:
    flux_tolerance_rel: float = 1e-9
    quadrature_tolerance_rel: float = 1e-8
    max_bisection_iters: int = 200
    bracket_growth_factor: float = 4.0
    frequency_window_override: float = None

    def __post_init__(self):
        for name in ("flux_tolerance_rel", "quadrature_tolerance_rel"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise InvalidParameterError(f"{name} must lie in (0, 1), got {v!r}")
        if int(self.max_bisection_iters) < 1:
            raise InvalidParameterError("max_bisection_iters must be >= 1")
        if not self.bracket_growth_factor > 1.0:
            raise InvalidParameterError("bracket_growth_factor must be > 1")
        w = self.frequency_window_override
        if w is not None and not (math.isfinite(w) and w > 0.0):
            raise InvalidParameterError("frequency_window_override must be finite and > 0")


@dataclass
class WaterfillSolution:
    scheme: DetectionScheme
    lagrange_multiplier: float
    requested_flux: float
    achieved_flux: float
    capacity: float
    support: tuple            # ((lo, hi), ...) in rad/s, symmetric about 0
    channel: object = field(repr=False)
    degenerate: bool = False
    iterations: int = 0

    def allocation(self, omega):
        """Photons per mode n(w) at detunings ``omega`` (rad/s)."""
        omega = np.asarray(omega, dtype=np.float64)
        if not self.support:
            return np.zeros_like(omega) if omega.ndim else 0.0
        nbar, _ = _densities(self.channel, self.scheme, self.lagrange_multiplier, np.atleast_1d(omega))
        return nbar if omega.ndim else float(nbar[0])

    @property
    def support_hz(self):
        """Total measure of the support in Hz (both sidebands)."""
        return sum(hi - lo for lo, hi in self.support) / (2.0 * math.pi)

    @property
    def support_edge(self):
        """Largest |w| with positive allocation, in rad/s."""
        return max((hi for _, hi in self.support), default=0.0)


def measurement_noise_spectrum(sn, scheme):
    """Classical noise density seen after homodyne or heterodyne detection.

    Homodyne: ``(2 S_N + 1) / 4``; heterodyne: ``(S_N + 1) / 2``.
    """
    scheme = DetectionScheme.parse(scheme)
    if scheme is DetectionScheme.HOLEVO:
        raise InvalidParameterError("the Holevo scheme has no classical measurement noise")
    sn = np.asarray(sn, dtype=np.float64)
    if np.any(sn < 0.0):
        raise InvalidParameterError("noise spectrum must be >= 0")
    out = (2.0 * sn + 1.0) / 4.0 if scheme is DetectionScheme.HOMODYNE else (sn + 1.0) / 2.0
    return float(out) if out.ndim == 0 else out


def _check_beta(beta):
    if not beta > 0.0:
        raise InvalidParameterError(f"Lagrange multiplier must be > 0, got {beta!r}")


def _densities(channel, scheme, beta, omega):
    h2, sn = channel.spectra(omega)
    if scheme is DetectionScheme.HOLEVO:
        return kernels.hsw_alloc(h2, sn, beta, GAIN_FLOOR)
    return kernels.classical_alloc(h2, sn, beta, _CLASSICAL_CODE[scheme], GAIN_FLOOR)


def _threshold(channel, scheme, beta, omega):
    h2, sn = channel.spectra(omega)
    if scheme is DetectionScheme.HOLEVO:
        return kernels.hsw_threshold(h2, sn, beta, GAIN_FLOOR)
    return kernels.classical_threshold(h2, sn, beta, _CLASSICAL_CODE[scheme], GAIN_FLOOR)


_EPS = np.finfo(np.float64).eps


def _noise_scales(scheme, beta, h2, sn, nbar, dens):
    # absolute roundoff of (nbar, dens): both are differences of larger terms
    on = nbar > 0.0
    h = np.where(on, h2, 1.0)
    if scheme is DetectionScheme.HOLEVO:
        y = np.where(on, h * nbar + sn, 0.0)
        dn = _EPS * (y + sn) / h
        dd = _EPS * (kernels.g_array(y) + kernels.g_array(np.where(on, sn, 0.0)))
    else:
        if scheme is DetectionScheme.HOMODYNE:
            level, s_meas = 0.5 * beta, (2.0 * sn + 1.0) / 4.0
        else:
            level, s_meas = beta, sn + 1.0
        dn = _EPS * 2.0 * level * np.ones_like(h)
        dd = _EPS * dens + dn * h / (s_meas * math.log(2.0))
    return np.where(on, dn, 0.0), np.where(on, dd, 0.0)


def hsw_allocation(channel, beta, omega):
    """Holevo-optimal photons per mode, ``max([1/(e^{b/|H|^2}-1) - S_N]/|H|^2, 0)``."""
    _check_beta(beta)
    omega = np.asarray(omega, dtype=np.float64)
    nbar, _ = _densities(channel, DetectionScheme.HOLEVO, beta, np.atleast_1d(omega))
    return nbar if omega.ndim else float(nbar[0])


def classical_allocation(channel, scheme, beta, omega):
    """Water-filling allocation for homodyne (level beta/2) or heterodyne (level beta)."""
    scheme = DetectionScheme.parse(scheme)
    if scheme is DetectionScheme.HOLEVO:
        raise InvalidParameterError("use hsw_allocation for the Holevo scheme")
    _check_beta(beta)
    omega = np.asarray(omega, dtype=np.float64)
    nbar, _ = _densities(channel, scheme, beta, np.atleast_1d(omega))
    return nbar if omega.ndim else float(nbar[0])


class _FluxProblem:
    """Support finding and integration for one (channel, scheme, config)."""

    def __init__(self, channel, scheme, cfg):
        self.channel = channel
        self.scheme = scheme
        self.cfg = cfg
        self.window = cfg.frequency_window_override or channel.support_hint()
        self.breaks = np.array([b for b in channel.breakpoints() if 0.0 < b < self.window])
        grid = np.linspace(0.0, self.window, EDGE_SCAN_POINTS)
        self.grid = np.union1d(grid, self.breaks)
        self.grid_spectra = channel.spectra(self.grid)
        self.rtol = (min(cfg.quadrature_tolerance_rel, 0.1 * cfg.flux_tolerance_rel),
                     cfg.quadrature_tolerance_rel)

    def _grid_threshold(self, beta):
        h2, sn = self.grid_spectra
        if self.scheme is DetectionScheme.HOLEVO:
            return kernels.hsw_threshold(h2, sn, beta, GAIN_FLOOR)
        return kernels.classical_threshold(h2, sn, beta, _CLASSICAL_CODE[self.scheme], GAIN_FLOOR)

    def _edge(self, beta, a, b):
        f = lambda w: float(_threshold(self.channel, self.scheme, beta, np.array([w]))[0])
        fa, fb = f(a), f(b)
        if fa > 0.0 and fb > 0.0 or fa <= 0.0 and fb <= 0.0:
            # sign change seen on the grid but not reproduced; keep the grid point
            return a if fa > 0.0 else b
        return brentq(f, a, b, xtol=1e-15 * self.window, rtol=4 * np.finfo(float).eps, maxiter=200)

    def half_support(self, beta):
        """Intervals of [0, window] where the allocation is positive."""
        pos = self._grid_threshold(beta) > 0.0
        if not np.any(pos):
            return []
        g = self.grid
        idx = np.flatnonzero(np.diff(pos.astype(np.int8)))
        starts = [0] if pos[0] else []
        ends = []
        for i in idx:
            if pos[i]:
                ends.append(i)
            else:
                starts.append(i + 1)
        if pos[-1]:
            ends.append(len(g) - 1)
        out = []
        for s, e in zip(starts, ends):
            lo = 0.0 if s == 0 else self._edge(beta, g[s - 1], g[s])
            hi = self.window if e == len(g) - 1 else self._edge(beta, g[e], g[e + 1])
            if hi > lo:
                out.append((lo, hi))
        return out

    def _integrand(self, beta):
        def f(w):
            h2, sn = self.channel.spectra(w)
            if self.scheme is DetectionScheme.HOLEVO:
                nbar, dens = kernels.hsw_alloc(h2, sn, beta, GAIN_FLOOR)
            else:
                nbar, dens = kernels.classical_alloc(h2, sn, beta, _CLASSICAL_CODE[self.scheme], GAIN_FLOOR)
            return np.vstack([nbar, dens, *_noise_scales(self.scheme, beta, h2, sn, nbar, dens)])
        return f

    def _breaks(self, intervals):
        pts = set()
        for lo, hi in intervals:
            pts.update((lo, hi))
            pts.update(b for b in self.breaks if lo < b < hi)
        return np.array(sorted(pts))

    def integrate(self, beta, intervals=None):
        """Return (flux, capacity, intervals, panels) for multiplier ``beta``."""
        if intervals is None:
            intervals = self.half_support(beta)
        if not intervals:
            return 0.0, 0.0, intervals, (np.empty(0), np.empty(0))
        # gaps between support intervals integrate to exactly zero, so one
        # call over all breaks keeps the tolerance relative to the total
        r = integrate(self._integrand(beta), self._breaks(intervals), self.rtol, roundoff=True)
        # even integrand: integral over R with measure dw/2pi is (1/pi) * integral over [0, W]
        return r.value[0] / math.pi, r.value[1] / math.pi, intervals, (r.lo, r.hi)

    def refined(self, beta, panels, splits=1):
        """Plain GK15 on the given panels after halving each ``splits`` times."""
        lo, hi = panels
        for _ in range(splits):
            mid = 0.5 * (lo + hi)
            lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        val, _ = fixed_panels(self._integrand(beta), lo, hi, roundoff=True)
        return val[0] / math.pi, val[1] / math.pi

    def flux(self, beta):
        return self.integrate(beta)[0]


def _increasing(scheme):
    # classical flux grows with the water level; Holevo flux shrinks as beta grows
    return scheme is not DetectionScheme.HOLEVO


def _solution(problem, beta, P, flux, cap, intervals, iterations, degenerate=False):
    support = tuple(sorted(
        [(-hi, -lo) for lo, hi in intervals if hi > 0.0] + [(lo, hi) for lo, hi in intervals]
    ))
    merged = []
    for lo, hi in support:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    return WaterfillSolution(
        scheme=problem.scheme, lagrange_multiplier=beta, requested_flux=P,
        achieved_flux=flux, capacity=max(cap, 0.0), support=tuple(merged),
        channel=problem.channel, degenerate=degenerate, iterations=iterations,
    )


def _degenerate(channel, scheme, P, iterations=0):
    beta = math.inf if scheme is DetectionScheme.HOLEVO else 0.0
    return WaterfillSolution(scheme, beta, P, 0.0, 0.0, (), channel, degenerate=True, iterations=iterations)


def solve_flux_constraint(channel, scheme, P, cfg=None):
    """Find the multiplier whose allocation carries exactly ``P`` photons/s."""
    scheme = DetectionScheme.parse(scheme)
    cfg = cfg or SolverConfig()
    if not (math.isfinite(P) and P >= 0.0):
        raise InvalidParameterError(f"photon flux must be finite and >= 0, got {P!r}")
    if P == 0.0:
        sol = _degenerate(channel, scheme, P)
        sol.degenerate = False
        return sol

    prob = _FluxProblem(channel, scheme, cfg)
    up = _increasing(scheme)
    tol = cfg.flux_tolerance_rel * P
    grow = cfg.bracket_growth_factor
    iters = 0

    def excess(beta):
        # > 0 when beta allocates too much flux
        return prob.flux(beta) - P

    beta = 1.0
    e = excess(beta)
    if abs(e) <= tol:
        lo = hi = beta
    else:
        # move beta in the direction that reduces |excess| until the sign flips
        too_much = e > 0.0
        step = (1.0 / grow) if (too_much == up) else grow
        prev = beta
        for _ in range(cfg.max_bisection_iters):
            iters += 1
            prev, beta = beta, beta * step
            e2 = excess(beta)
            if abs(e2) <= tol or (e2 > 0.0) != too_much:
                break
        else:
            if not too_much and not np.any(prob.grid_spectra[0] > GAIN_FLOOR):
                log.warning("no allocation resolvable for P=%g (%s); returning zero capacity", P, scheme.value)
                return _degenerate(channel, scheme, P, iters)
            raise SolverError(
                f"could not bracket the multiplier for P={P:g} ({scheme.value}) "
                f"within {cfg.max_bisection_iters} steps",
                bracket=(min(prev, beta), max(prev, beta)),
            )
        lo, hi = sorted((prev, beta))
        if abs(e2) <= tol:
            lo = hi = beta

    if lo != hi:
        # invariant: excess has opposite signs at lo and hi
        e_lo = excess(lo)
        for _ in range(cfg.max_bisection_iters):
            iters += 1
            mid = math.sqrt(lo * hi) if hi / lo > 2.0 else 0.5 * (lo + hi)
            if not lo < mid < hi:
                break
            e_mid = excess(mid)
            if abs(e_mid) <= tol:
                lo = hi = mid
                break
            if (e_mid > 0.0) == (e_lo > 0.0):
                lo, e_lo = mid, e_mid
            else:
                hi = mid
        else:
            raise SolverError(
                f"bisection did not meet the flux tolerance for P={P:g} ({scheme.value})",
                bracket=(lo, hi),
            )
        if lo != hi:
            # bracket collapsed to adjacent doubles without meeting tolerance
            beta = lo if abs(excess(lo)) <= abs(excess(hi)) else hi
            flux = prob.flux(beta)
            if flux == 0.0:
                log.warning("allocation for P=%g (%s) is below numeric resolution", P, scheme.value)
                return _degenerate(channel, scheme, P, iters)
            if abs(flux - P) > tol:
                # adjacent multipliers straddle P: the water level sits so close
                # to the noise floor that one ulp moves the flux by more than tol
                log.warning("flux for P=%g (%s) resolvable only to %.1e relative; returning closest",
                            P, scheme.value, abs(flux - P) / P)
                f2, cap, intervals, _ = prob.integrate(beta)
                return _solution(prob, beta, P, f2, cap, intervals, iters, degenerate=True)
            lo = hi = beta

    beta = lo
    flux, cap, intervals, _ = prob.integrate(beta)
    return _solution(prob, beta, P, flux, cap, intervals, iters)


def capacity(channel, scheme, P, cfg=None):
    """Capacity in bits/s for photon flux ``P``; returns ``(capacity, solution)``."""
    sol = solve_flux_constraint(channel, scheme, P, cfg)
    return sol.capacity, sol


def refinement_check(solution, cfg=None, splits=1):
    """Recompute (flux, capacity) of a solution on uniformly halved panels."""
    cfg = cfg or SolverConfig()
    prob = _FluxProblem(solution.channel, solution.scheme, cfg)
    flux, cap, intervals, panels = prob.integrate(solution.lagrange_multiplier)
    return (flux, cap), prob.refined(solution.lagrange_multiplier, panels, splits)
