"""Command-line entry point: ``capacity sweep`` and ``capacity spectra``.

Exit codes: 0 success, 2 configuration error, 3 solver error.
"""

import argparse
import io
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, kernels
from .capacity import DetectionScheme, SolverError, capacity
from .config import ConfigError, load_config
from .physics import InvalidParameterError
from .quadrature import QuadratureError

log = logging.getLogger("lticap")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

SWEEP_COLUMNS = ["flux_photons_per_s", "scheme", "capacity_bits_per_s",
                 "lagrange_multiplier", "achieved_flux", "support_hz"]
SPECTRA_COLUMNS = ["detuning_hz", "squared_magnitude", "noise_spectrum", "allocation"]


def _fmt(x):
    return repr(float(x))


def _header(kind, cfg):
    env = cfg.env
    stages = "; ".join(
        f"{type(s.shape).__name__.lower()} {_fmt(s.peak_gain_db)} dB" for s in cfg.stages
    )
    return [
        f"# lticap {kind} (version {__version__})",
        f"# config: {cfg.source} sha256={cfg.digest}",
        f"# carrier_rad_per_s={_fmt(env.carrier_angular_frequency)} temperature_k={_fmt(env.temperature)}"
        f" thermal_occupancy={_fmt(env.thermal_occupancy)}",
        f"# stages: {stages}",
    ]


def _solve_point(channel, scheme, flux, solver):
    try:
        cap, sol = capacity(channel, scheme, flux, solver)
        status = "degenerate" if sol.degenerate else "ok"
        return flux, scheme, sol, status
    except (SolverError, QuadratureError) as exc:
        return flux, scheme, None, f"failed: {exc}"


def sweep_rows(cfg, threads=1):
    """Solve every (flux, scheme) pair; rows come back sorted by flux, then scheme name."""
    channel = cfg.channel()
    jobs = [(f, s) for f in cfg.flux_points for s in cfg.schemes]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda j: _solve_point(channel, j[1], j[0], cfg.solver), jobs))
    else:
        results = [_solve_point(channel, s, f, cfg.solver) for f, s in jobs]
    results.sort(key=lambda r: (r[0], r[1].value))
    return results


def render_sweep(cfg, results):
    failed = any(r[2] is None for r in results)
    buf = io.StringIO()
    for line in _header("sweep", cfg):
        buf.write(line + "\n")
    cols = SWEEP_COLUMNS + (["status"] if failed else [])
    buf.write(",".join(cols) + "\n")
    for flux, scheme, sol, status in results:
        if sol is None:
            row = [_fmt(flux), scheme.value, "nan", "nan", "nan", "nan"]
        else:
            row = [_fmt(flux), scheme.value, _fmt(sol.capacity), _fmt(sol.lagrange_multiplier),
                   _fmt(sol.achieved_flux), _fmt(sol.support_hz)]
        if failed:
            row.append(status if "," not in status else '"' + status.replace('"', '""') + '"')
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def spectra_table(cfg, flux, scheme, points=None):
    """Grid over the allocation support plus 20% margin, in Hz."""
    points = points or cfg.grid_points
    channel = cfg.channel()
    _, sol = capacity(channel, scheme, flux, cfg.solver)
    edge = sol.support_edge
    if edge <= 0.0:
        edge = cfg.solver.frequency_window_override or channel.support_hint()
    f_edge = 1.2 * edge / (2.0 * math.pi)
    f = np.linspace(-f_edge, f_edge, points)
    h2, sn = channel.spectra(2.0 * math.pi * f)
    alloc = sol.allocation(2.0 * math.pi * f)
    return sol, f, h2, sn, alloc


def render_spectra(cfg, sol, f, h2, sn, alloc):
    buf = io.StringIO()
    for line in _header("spectra", cfg):
        buf.write(line + "\n")
    buf.write(f"# scheme={sol.scheme.value} flux={_fmt(sol.requested_flux)}"
              f" lagrange_multiplier={_fmt(sol.lagrange_multiplier)} capacity={_fmt(sol.capacity)}\n")
    buf.write(",".join(SPECTRA_COLUMNS) + "\n")
    for row in zip(f, h2, sn, alloc):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _emit(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
        log.info("wrote %s", path)


def cmd_sweep(args):
    cfg = load_config(args.config)
    results = sweep_rows(cfg, threads=args.threads)
    _emit(render_sweep(cfg, results), args.output or cfg.output_path)
    failures = [r for r in results if r[2] is None]
    for flux, scheme, _, status in failures:
        print(f"error: solver failed at flux={flux:g} scheme={scheme.value}: {status}", file=sys.stderr)
    for flux, scheme, sol, status in results:
        if status == "degenerate":
            log.warning("flux=%g scheme=%s: allocation below numeric resolution", flux, scheme.value)
    return EXIT_SOLVER if failures else EXIT_OK


def cmd_spectra(args):
    cfg = load_config(args.config)
    try:
        scheme = DetectionScheme.parse(args.scheme)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc), field="--scheme") from None
    if not (math.isfinite(args.flux) and args.flux >= 0.0):
        raise ConfigError(f"must be finite and >= 0, got {args.flux!r}", field="--flux")
    try:
        sol, f, h2, sn, alloc = spectra_table(cfg, args.flux, scheme, args.points)
    except (SolverError, QuadratureError) as exc:
        print(f"error: solver failed at flux={args.flux:g} scheme={scheme.value}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _emit(render_spectra(cfg, sol, f, h2, sn, alloc), args.output)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker threads for independent sweep points")
    common.add_argument("--verbose", "-v", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="capacity", parents=[common],
        description="Holevo, homodyne and heterodyne capacities of LTI bosonic channels.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="capacity versus photon flux, as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="CSV path (default: output_path from the config, else stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectra", parents=[common], help="|H|^2, S_N and allocation over detuning")
    p.add_argument("--config", required=True)
    p.add_argument("--flux", type=float, required=True, help="photons/s")
    p.add_argument("--scheme", required=True, choices=[s.value for s in DetectionScheme])
    p.add_argument("--points", type=int, default=None, help="grid size (default: config or 2048)")
    p.add_argument("--output")
    p.set_defaults(func=cmd_spectra)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    args.threads = max(1, getattr(args, "threads", 1))
    verbose = getattr(args, "verbose", False)
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    log.info("kernel backend: %s", kernels.BACKEND)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
