"""Scenario files: schema, parsing, overrides and problem construction.

Scenario files are TOML.  Lengths are metres, angles degrees, thresholds
watts, powers ``|E|^2``.  Top-level keys::

    name, wavelength, unit_gain = 1.0, propagation_mode = "spherical"
    [grid]                 rows, cols, spacing
    [[sources]]            r, theta, phi, field_amplitude = 1.0
    [[users]]              r, theta, phi, weight = 1.0
    [[suppression_regions]] theta = [lo, hi], phi = [lo, hi], r,
                           sample_spacing = 1.0, and exactly one of
                           threshold (W) or threshold_factor (x Peak)
    [solver]               SolverSettings fields
    [quantrand]            bits, max_sweeps
    [sweep]                theta = [lo, hi], phi = [..], step
    [study]                trials, n_grid, threshold_factors, bits

``threshold_factor`` scales the Peak reference: the smallest received user
power of the unconstrained (Non-Constraint) solution.
"""

from dataclasses import dataclass, field, fields, replace
import copy
import hashlib
import json
import math
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .baselines import QuantizedSearchSettings
from .errors import ConfigError
from .field import (MODES, Source, build_grid, channel_matrix, discretize_suppression,
                    quadratic_form)
from .solver import ProblemInstance, SolverSettings

BUNDLED_DIR = Path(__file__).parent / "scenarios"


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    spacing: float


@dataclass(frozen=True)
class User:
    r: float
    theta: float
    phi: float
    weight: float = 1.0


@dataclass(frozen=True)
class SuppressionRegion:
    theta: tuple
    phi: tuple
    r: float
    sample_spacing: float = 1.0
    threshold: float | None = None
    threshold_factor: float | None = None


@dataclass(frozen=True)
class SweepSpec:
    theta: tuple = (-90.0, 90.0)
    phi: tuple = (0.0,)
    step: float = 0.2


@dataclass(frozen=True)
class StudySpec:
    trials: int = 20
    n_grid: tuple = (16, 32, 64)
    threshold_factors: tuple = (0.01, 0.5)
    bits: int = 6


@dataclass(frozen=True)
class ScenarioConfig:
    wavelength: float
    grid: GridSpec
    sources: tuple
    users: tuple
    suppression_regions: tuple = ()
    unit_gain: float = 1.0
    propagation_mode: str = "spherical"
    name: str = "scenario"
    solver: SolverSettings = field(default_factory=SolverSettings)
    quantrand: QuantizedSearchSettings = field(default_factory=QuantizedSearchSettings)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    study: StudySpec = field(default_factory=StudySpec)
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def observation_distance(self):
        return self.users[0].r

    def with_grid(self, rows=None, cols=None):
        g = replace(self.grid, rows=rows or self.grid.rows, cols=cols or self.grid.cols)
        raw = copy.deepcopy(self.raw)
        raw.setdefault("grid", {}).update(rows=g.rows, cols=g.cols)
        return replace(self, grid=g, raw=raw)

    def with_seed(self, seed):
        return replace(self, solver=replace(self.solver, rng_seed=int(seed)),
                       quantrand=replace(self.quantrand, rng_seed=int(seed)))

    def scenario_hash(self):
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# -- parsing -----------------------------------------------------------------

def _num(d, key, where, default=None, positive=False, required=True):
    if key not in d:
        if default is not None or not required:
            return default
        raise ConfigError(f"{where}.{key}: missing required field")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}.{key}: expected a finite number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key}: must be > 0, got {v!r}")
    return float(v)


def _int(d, key, where, default=None, minimum=1):
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}.{key}: missing required field")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(f"{where}.{key}: expected an integer >= {minimum}, got {v!r}")
    return v


def _range(d, key, where, default=None):
    v = d.get(key, default)
    if v is None:
        raise ConfigError(f"{where}.{key}: missing required field")
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = [v, v]
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)):
        raise ConfigError(f"{where}.{key}: expected [lo, hi], got {v!r}")
    lo, hi = float(v[0]), float(v[1])
    if lo > hi:
        raise ConfigError(f"{where}.{key}: bounds out of order ({lo} > {hi})")
    return (lo, hi)


def _table_list(raw, key, required):
    v = raw.get(key, [])
    if not isinstance(v, list) or not all(isinstance(x, dict) for x in v):
        raise ConfigError(f"{key}: expected an array of tables")
    if required and not v:
        raise ConfigError(f"{key}: at least one entry is required")
    return v


def _dataclass_section(cls, raw, where):
    sect = raw.get(where, {})
    if not isinstance(sect, dict):
        raise ConfigError(f"{where}: expected a table")
    known = {f.name for f in fields(cls)}
    unknown = set(sect) - known
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for k, v in sect.items():
        kwargs[k] = tuple(v) if isinstance(v, list) else v
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_scenario(raw):
    """Validate a scenario mapping (as loaded from TOML) into a ScenarioConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a table")
    wl = _num(raw, "wavelength", "scenario", positive=True)
    g = raw.get("grid")
    if not isinstance(g, dict):
        raise ConfigError("grid: missing [grid] table")
    grid = GridSpec(_int(g, "rows", "grid"), _int(g, "cols", "grid"),
                    _num(g, "spacing", "grid", positive=True))
    sources = []
    for i, s in enumerate(_table_list(raw, "sources", True)):
        w = f"sources[{i}]"
        th = _num(s, "theta", w)
        if not 0.0 <= th < 90.0:
            raise ConfigError(f"{w}.theta: source elevation must lie in [0, 90), got {th}")
        sources.append(Source(_num(s, "r", w, positive=True), th, _num(s, "phi", w),
                              _num(s, "field_amplitude", w, default=1.0)))
    users = []
    for i, u in enumerate(_table_list(raw, "users", True)):
        w = f"users[{i}]"
        users.append(User(_num(u, "r", w, positive=True), _num(u, "theta", w),
                          _num(u, "phi", w, default=0.0),
                          _num(u, "weight", w, default=1.0, positive=True)))
    regions = []
    for i, s in enumerate(_table_list(raw, "suppression_regions", False)):
        w = f"suppression_regions[{i}]"
        thr = _num(s, "threshold", w, required=False)
        fac = _num(s, "threshold_factor", w, required=False)
        if (thr is None) == (fac is None):
            raise ConfigError(f"{w}: give exactly one of threshold or threshold_factor")
        if thr is not None and thr < 0 or fac is not None and fac < 0:
            raise ConfigError(f"{w}: thresholds must be non-negative")
        regions.append(SuppressionRegion(
            theta=_range(s, "theta", w), phi=_range(s, "phi", w, default=[0.0, 0.0]),
            r=_num(s, "r", w, positive=True),
            sample_spacing=_num(s, "sample_spacing", w, default=1.0, positive=True),
            threshold=thr, threshold_factor=fac))
    mode = raw.get("propagation_mode", "spherical")
    if mode not in MODES:
        raise ConfigError(f"propagation_mode: expected one of {MODES}, got {mode!r}")
    gain = _num(raw, "unit_gain", "scenario", default=1.0, positive=True)
    sc = ScenarioConfig(
        wavelength=wl, grid=grid, sources=tuple(sources), users=tuple(users),
        suppression_regions=tuple(regions), unit_gain=gain, propagation_mode=mode,
        name=str(raw.get("name", "scenario")),
        solver=_dataclass_section(SolverSettings, raw, "solver"),
        quantrand=_dataclass_section(QuantizedSearchSettings, raw, "quantrand"),
        sweep=_dataclass_section(SweepSpec, raw, "sweep"),
        study=_dataclass_section(StudySpec, raw, "study"),
        raw=copy.deepcopy(raw),
    )
    if sc.sweep.step <= 0:
        raise ConfigError("sweep.step: must be > 0")
    return sc


def _parse_value(text):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(raw, overrides):
    """Apply ``key.path=value`` overrides; list entries are addressed by index.

    >>> apply_overrides({"solver": {}}, ["solver.epsilon=1e-5"])
    {'solver': {'epsilon': 1e-05}}
    """
    raw = copy.deepcopy(raw)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected KEY=VALUE")
        key, _, text = item.partition("=")
        parts = key.strip().split(".")
        node = raw
        for i, p in enumerate(parts[:-1]):
            if isinstance(node, list):
                try:
                    node = node[int(p)]
                except (ValueError, IndexError):
                    raise ConfigError(f"override {key}: bad list index {p!r}") from None
            else:
                node = node.setdefault(p, {})
        last = parts[-1]
        value = _parse_value(text.strip())
        if isinstance(node, list):
            try:
                node[int(last)] = value
            except (ValueError, IndexError):
                raise ConfigError(f"override {key}: bad list index {last!r}") from None
        elif isinstance(node, dict):
            node[last] = value
        else:
            raise ConfigError(f"override {key}: {'.'.join(parts[:-1])} is not a table")
    return raw


def load_scenario(path, overrides=()):
    """Read and validate a scenario file.  Bundled names (``table1``) also resolve."""
    p = Path(path)
    if not p.exists() and (BUNDLED_DIR / f"{path}.scenario").exists():
        p = BUNDLED_DIR / f"{path}.scenario"
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read scenario ({exc.strerror})") from None
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from None
    return parse_scenario(apply_overrides(raw, overrides))


def bundled_scenarios():
    return sorted(p.stem for p in BUNDLED_DIR.glob("*.scenario"))


# -- problem construction ---------------------------------------------------

@dataclass
class Setup:
    """Channels for every user and suppression sample of one scenario."""

    scenario: ScenarioConfig
    grid: object
    user_channels: np.ndarray  # (K, N)
    suppression_points: list
    suppression_channels: np.ndarray  # (Q, N)

    @property
    def region_of_point(self):
        return [p.region for p in self.suppression_points]

    def instance(self, peak=None, thresholds=None):
        """ProblemInstance with thresholds resolved (``peak`` for factor-based ones)."""
        users = [quadratic_form(h, 1.0 / u.weight)
                 for h, u in zip(self.user_channels, self.scenario.users)]
        if thresholds is None:
            thresholds = []
            for p in self.suppression_points:
                if p.threshold is not None:
                    thresholds.append(p.threshold)
                elif peak is None:
                    raise ConfigError("threshold_factor needs the unconstrained Peak")
                else:
                    thresholds.append(p.factor * peak)
        cons = [quadratic_form(h) for h in self.suppression_channels]
        return ProblemInstance(users, cons, thresholds)

    def unconstrained_instance(self):
        users = [quadratic_form(h, 1.0 / u.weight)
                 for h, u in zip(self.user_channels, self.scenario.users)]
        return ProblemInstance(users)

    @property
    def needs_peak(self):
        return any(p.threshold is None for p in self.suppression_points)

    def channels(self, points):
        sc = self.scenario
        return channel_matrix(self.grid, sc.sources, points, sc.wavelength, sc.unit_gain,
                              sc.propagation_mode)


@dataclass(frozen=True)
class _RegionPoint:
    r: float
    theta: float
    phi: float
    threshold: float | None
    factor: float | None
    region: int


def build_setup(scenario):
    sc = scenario
    grid = build_grid(sc.grid.rows, sc.grid.cols, sc.grid.spacing)
    user_pts = [(u.r, u.theta, u.phi) for u in sc.users]
    H = channel_matrix(grid, sc.sources, user_pts, sc.wavelength, sc.unit_gain,
                       sc.propagation_mode)
    points = []
    for i, reg in enumerate(sc.suppression_regions):
        for p in discretize_suppression(reg):
            points.append(_RegionPoint(p.r, p.theta, p.phi, reg.threshold,
                                       reg.threshold_factor, i))
    if points:
        G = channel_matrix(grid, sc.sources, [(p.r, p.theta, p.phi) for p in points],
                           sc.wavelength, sc.unit_gain, sc.propagation_mode)
    else:
        G = np.zeros((0, grid.size), dtype=complex)
    return Setup(sc, grid, H, points, G)
