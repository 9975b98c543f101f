"""Sweep configuration files (YAML, ``schema_version: 1``).

Frequencies in the file are ordinary (Hz) and converted to rad/s here;
stage gains are dB of power.
"""

import csv
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .capacity import DetectionScheme, SolverConfig
from .filters import Butterworth4, FilterStage, Flat, Tabulated, cascade
from .physics import InvalidParameterError, PhysicalEnvironment

SCHEMA_VERSION = 1
TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Schema violation; ``str()`` names the offending field and line."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(field)
        super().__init__(f"{': '.join(where)}: {message}" if where else message)


@dataclass(frozen=True)
class SweepConfig:
    env: PhysicalEnvironment
    stages: tuple
    schemes: tuple
    flux_points: tuple
    solver: SolverConfig
    output_path: str = None
    grid_points: int = 2048
    source: str = ""
    digest: str = ""

    def channel(self):
        return cascade(self.stages, self.env)


def _line_map(node, path="", out=None):
    # map dotted field paths to 1-based source lines
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            _line_map(v, f"{path}.{k.value}" if path else str(k.value), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_map(v, f"{path}[{i}]", out)
    return out


class _Reader:
    def __init__(self, lines):
        self.lines = lines

    def fail(self, field, message):
        line = None
        probe = field
        while probe is not None:
            if probe in self.lines:
                line = self.lines[probe]
                break
            if not probe:
                break
            probe = probe.rsplit(".", 1)[0] if "." in probe else ""
        raise ConfigError(message, field, line)

    def number(self, mapping, key, path, required=True, default=None, positive=False, nonneg=False):
        if isinstance(key, int):
            field = f"{path}[{key}]"
        else:
            field = f"{path}.{key}" if path else key
        if key not in mapping:
            if required:
                self.fail(path or field, f"missing required field '{key}'")
            return default
        raw = mapping[key]
        if isinstance(raw, bool):
            self.fail(field, f"expected a number, got {raw!r}")
        try:
            val = float(raw)
        except (TypeError, ValueError):
            self.fail(field, f"expected a number, got {raw!r}")
        if not math.isfinite(val):
            self.fail(field, f"must be finite, got {raw!r}")
        if positive and val <= 0.0:
            self.fail(field, f"must be > 0, got {raw!r}")
        if nonneg and val < 0.0:
            self.fail(field, f"must be >= 0, got {raw!r}")
        return val

    def mapping(self, doc, key, path="", required=True):
        field = f"{path}.{key}" if path else key
        if key not in doc:
            if required:
                self.fail(path, f"missing required section '{key}'")
            return {}
        val = doc[key]
        if not isinstance(val, dict):
            self.fail(field, "expected a mapping")
        return val


def _read_table(path, reader, field):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        reader.fail(field, f"cannot read table: {exc}")
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    try:
        data = np.array([[float(r[0]), float(r[1])] for r in rows])
    except (ValueError, IndexError):
        reader.fail(field, "table rows must be 'detuning_hz,magnitude'")
    if data.size == 0:
        reader.fail(field, "table is empty")
    return data[:, 0], data[:, 1]


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def _parse_stage(raw, i, reader, base_dir):
    path = f"stages[{i}]"
    if not isinstance(raw, dict):
        reader.fail(path, "each stage must be a mapping")
    shape = raw.get("shape")
    gain = reader.number(raw, "peak_gain_db", path, required=False, default=0.0)
    try:
        if shape == "butterworth4":
            cutoff = reader.number(raw, "cutoff_hz", path, positive=True)
            form = raw.get("response", "literal")
            if form not in ("literal", "conventional"):
                reader.fail(f"{path}.response", f"expected 'literal' or 'conventional', got {form!r}")
            return FilterStage(Butterworth4(TWO_PI * cutoff, form == "conventional"), gain)
        if shape == "flat":
            bw = reader.number(raw, "bandwidth_hz", path, positive=True)
            return FilterStage(Flat(TWO_PI * bw), gain)
        if shape == "tabulated":
            if "table" in raw:
                tpath = Path(str(raw["table"]))
                if not tpath.is_absolute():
                    tpath = base_dir / tpath
                det, mag = _read_table(tpath, reader, f"{path}.table")
            elif "detuning_hz" in raw and "magnitude" in raw:
                try:
                    det = np.array([float(v) for v in raw["detuning_hz"]])
                    mag = np.array([float(v) for v in raw["magnitude"]])
                except (TypeError, ValueError):
                    reader.fail(path, "detuning_hz and magnitude must be lists of numbers")
            else:
                reader.fail(path, "tabulated stage needs 'table' or 'detuning_hz' + 'magnitude'")
            return FilterStage(Tabulated(TWO_PI * det, mag), gain)
    except InvalidParameterError as exc:
        reader.fail(path, str(exc))
    reader.fail(f"{path}.shape", f"expected 'butterworth4', 'flat' or 'tabulated', got {shape!r}")


def _parse_flux(doc, reader):
    if "flux_points" not in doc:
        reader.fail("", "missing required field 'flux_points'")
    raw = doc["flux_points"]
    if isinstance(raw, list):
        if not raw:
            reader.fail("flux_points", "needs at least one flux point")
        return tuple(reader.number({i: v}, i, "flux_points", nonneg=True) for i, v in enumerate(raw))
    if isinstance(raw, dict):
        lo = reader.number(raw, "min", "flux_points", nonneg=True)
        hi = reader.number(raw, "max", "flux_points", nonneg=True)
        count = raw.get("count")
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            reader.fail("flux_points.count", f"expected a positive integer, got {count!r}")
        spacing = raw.get("spacing", "log")
        if hi < lo:
            reader.fail("flux_points.max", "must be >= min")
        if spacing == "log":
            if lo <= 0.0:
                reader.fail("flux_points.min", "log spacing needs min > 0")
            pts = np.geomspace(lo, hi, count) if count > 1 else np.array([lo])
        elif spacing == "linear":
            pts = np.linspace(lo, hi, count) if count > 1 else np.array([lo])
        else:
            reader.fail("flux_points.spacing", f"expected 'log' or 'linear', got {spacing!r}")
        return tuple(float(p) for p in pts)
    reader.fail("flux_points", "expected a list or a {min, max, count, spacing} mapping")


def _parse_solver(doc, reader):
    raw = reader.mapping(doc, "solver", required=False)
    kwargs = {}
    for key in ("flux_tolerance_rel", "quadrature_tolerance_rel", "bracket_growth_factor"):
        if key in raw:
            kwargs[key] = reader.number(raw, key, "solver", positive=True)
    if "max_bisection_iters" in raw:
        v = raw["max_bisection_iters"]
        if isinstance(v, bool) or not isinstance(v, int):
            reader.fail("solver.max_bisection_iters", f"expected an integer, got {v!r}")
        kwargs["max_bisection_iters"] = v
    if "frequency_window_hz" in raw:
        kwargs["frequency_window_override"] = TWO_PI * reader.number(raw, "frequency_window_hz", "solver", positive=True)
    unknown = set(raw) - {"flux_tolerance_rel", "quadrature_tolerance_rel", "bracket_growth_factor",
                          "max_bisection_iters", "frequency_window_hz"}
    if unknown:
        reader.fail("solver", f"unknown solver fields {sorted(unknown)}")
    try:
        return SolverConfig(**kwargs)
    except InvalidParameterError as exc:
        reader.fail("solver", str(exc))


def parse_config(text, base_dir=".", source="<string>"):
    """Validate a YAML document and build a :class:`SweepConfig`."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None) from None
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a mapping", line=1)
    reader = _Reader(_line_map(root))

    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        reader.fail("schema_version", f"expected schema_version {SCHEMA_VERSION}, got {version!r}")

    env_raw = reader.mapping(doc, "environment")
    temp = reader.number(env_raw, "temperature_k", "environment", nonneg=True)
    try:
        if "wavelength_nm" in env_raw:
            lam = reader.number(env_raw, "wavelength_nm", "environment", positive=True)
            env = PhysicalEnvironment.from_wavelength(lam * 1e-9, temp)
        elif "carrier_hz" in env_raw:
            env = PhysicalEnvironment.from_frequency(
                reader.number(env_raw, "carrier_hz", "environment", positive=True), temp)
        else:
            reader.fail("environment", "needs 'wavelength_nm' or 'carrier_hz'")
    except InvalidParameterError as exc:
        reader.fail("environment", str(exc))

    stages_raw = doc.get("stages")
    if not isinstance(stages_raw, list) or not stages_raw:
        reader.fail("stages", "needs a non-empty list of stages")
    base = Path(base_dir)
    stages = tuple(_parse_stage(s, i, reader, base) for i, s in enumerate(stages_raw))

    schemes_raw = doc.get("schemes", [s.value for s in DetectionScheme])
    if not isinstance(schemes_raw, list) or not schemes_raw:
        reader.fail("schemes", "needs a non-empty list")
    schemes = []
    for i, s in enumerate(schemes_raw):
        try:
            sch = DetectionScheme.parse(s)
        except InvalidParameterError as exc:
            reader.fail(f"schemes[{i}]", str(exc))
        if sch not in schemes:
            schemes.append(sch)

    flux = _parse_flux(doc, reader)
    solver = _parse_solver(doc, reader)

    grid_points = 2048
    spectra = reader.mapping(doc, "spectra", required=False)
    if "grid_points" in spectra:
        gp = spectra["grid_points"]
        if isinstance(gp, bool) or not isinstance(gp, int) or gp < 2:
            reader.fail("spectra.grid_points", f"expected an integer >= 2, got {gp!r}")
        grid_points = gp

    out = doc.get("output_path")
    if out is not None and not isinstance(out, str):
        reader.fail("output_path", "expected a string")
    if out is not None and not Path(out).is_absolute():
        out = str(base / out)

    return SweepConfig(
        env=env, stages=stages, schemes=tuple(schemes), flux_points=flux, solver=solver,
        output_path=out, grid_points=grid_points, source=source,
        digest=hashlib.sha256(text.encode()).hexdigest(),
    )


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text, base_dir=path.parent, source=path.name)
