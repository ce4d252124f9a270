"""Run configuration: an INI file with fixed sections and keys.

Grammar: ``[section]`` headers followed by ``key = value`` lines; ``#`` and
``;`` start comments. Lists are comma separated. Every key is optional, but
the file must resolve to a complete run (``gamma`` and one of ``nu``/``eta``
or a ``preset``). Unknown sections or keys are rejected.

    [run]          preset, nu_sweep, out, inflow, outflow_order, weno_epsilon
    [gas]          gamma, nu, eta
    [profile]      shape (exp1 | exp2 | spherical | straight | table), table, n_dim, x_b, x_c
    [grid]         dx, n_cells
    [time]         cfl_ratio, t_final, snapshot_stride
    [data]         kind (exp-data | table), s0, r0, s0_prime, r0_prime,
                   sb_decay, rb_decay, initial_table, boundary_table
    [diagnostics]  probes, traces, mono_tol, claim_tol, strict_nu, c_xi, delta
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import geometry, presets
from .conditions import BoundaryData, InitialData
from .errors import ConfigError, DomainError
from .model import GasParameters
from .solver import Grid, SolverConfig

PRESETS = ("experiment1", "experiment2")
SHAPES = ("exp1", "exp2", "spherical", "straight", "table")


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _fmt_floats(vals) -> str:
    return ", ".join(repr(float(v)) for v in vals)


# section, key -> (field name, parser, formatter)
_SCHEMA = {
    "run": {
        "preset": ("preset", str, str),
        "nu_sweep": ("nu_sweep", _floats, _fmt_floats),
        "out": ("out", str, str),
        "inflow": ("inflow", str, str),
        "outflow_order": ("outflow_order", int, str),
        "weno_epsilon": ("weno_epsilon", float, repr),
    },
    "gas": {
        "gamma": ("gamma", float, repr),
        "nu": ("nu", float, repr),
        "eta": ("eta", float, repr),
    },
    "profile": {
        "shape": ("shape", str, str),
        "table": ("profile_table", str, str),
        "n_dim": ("n_dim", int, str),
        "x_b": ("x_b", float, repr),
        "x_c": ("x_c", float, repr),
    },
    "grid": {
        "dx": ("dx", float, repr),
        "n_cells": ("n_cells", int, str),
    },
    "time": {
        "cfl_ratio": ("cfl_ratio", float, repr),
        "t_final": ("t_final", float, repr),
        "snapshot_stride": ("snapshot_stride", int, str),
    },
    "data": {
        "kind": ("data_kind", str, str),
        "s0": ("s0", float, repr),
        "r0": ("r0", float, repr),
        "s0_prime": ("s0_prime", float, repr),
        "r0_prime": ("r0_prime", float, repr),
        "sb_decay": ("sb_decay", float, repr),
        "rb_decay": ("rb_decay", float, repr),
        "initial_table": ("initial_table", str, str),
        "boundary_table": ("boundary_table", str, str),
    },
    "diagnostics": {
        "probes": ("probes", _floats, _fmt_floats),
        "traces": ("traces", int, str),
        "mono_tol": ("mono_tol", float, repr),
        "claim_tol": ("claim_tol", float, repr),
        "strict_nu": ("strict_nu", float, repr),
        "c_xi": ("c_xi", float, repr),
        "delta": ("delta", float, repr),
    },
}


@dataclass(frozen=True)
class RunConfig:
    preset: str | None = None
    nu_sweep: tuple = ()
    out: str = "runs"
    inflow: str = "ilw"
    outflow_order: int = 3
    weno_epsilon: float = 1e-6
    gamma: float | None = None
    nu: float | None = None
    eta: float | None = None
    shape: str = "exp1"
    profile_table: str | None = None
    n_dim: int | None = None
    x_b: float = 1.0
    x_c: float = 10.0
    dx: float | None = None
    n_cells: int | None = None
    cfl_ratio: float = 0.1
    t_final: float = 10.0
    snapshot_stride: int = 100
    data_kind: str = "exp-data"
    s0: float | None = None
    r0: float | None = None
    s0_prime: float | None = None
    r0_prime: float | None = None
    sb_decay: float = 1.0
    rb_decay: float = 1.0
    initial_table: str | None = None
    boundary_table: str | None = None
    probes: tuple = (1.0, 2.0, 5.0)
    traces: int = 10
    mono_tol: float = 1e-6
    claim_tol: float = 1e-6
    strict_nu: float = 1e-3
    c_xi: float = 2.0
    delta: float | None = None

    def __post_init__(self):
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigError(f"preset must be one of {PRESETS}")
        if self.shape not in SHAPES:
            raise ConfigError(f"profile shape must be one of {SHAPES}")
        if self.data_kind not in ("exp-data", "table"):
            raise ConfigError("data kind must be exp-data or table")

    @classmethod
    def for_preset(cls, tag: str, nus=(0.1, 1e-3, 1e-5), **overrides) -> "RunConfig":
        if tag not in PRESETS:
            raise ConfigError(f"unknown preset {tag!r}")
        base = dict(preset=tag, nu_sweep=tuple(float(n) for n in nus), gamma=1.4,
                    shape="exp1" if tag == "experiment1" else "exp2",
                    x_b=1.0, x_c=10.0, dx=0.01, data_kind="exp-data")
        base.update(overrides)
        return cls(**base)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    @property
    def sweep(self) -> tuple:
        if self.nu_sweep:
            return self.nu_sweep
        if self.nu is not None:
            return (self.nu,)
        if self.eta is not None and self.gamma is not None:
            return (GasParameters.from_eta(self.gamma, self.eta).nu,)
        raise ConfigError("no nu given: set gas.nu, gas.eta or run.nu_sweep")

    # ------------------------------------------------------------ IO

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for section, keys in _SCHEMA.items():
            cp.add_section(section)
            for key, (name, _, fmt) in keys.items():
                val = getattr(self, name)
                if val is None or (isinstance(val, tuple) and not val):
                    continue
                cp.set(section, key, fmt(val))
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def write(self, path) -> None:
        Path(path).write_text(self.to_ini())


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    values = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            name, parse, _ = _SCHEMA[section][key]
            try:
                values[name] = parse(raw.strip())
            except ValueError:
                raise ConfigError(f"{source}: bad value for {section}.{key}: {raw!r}") from None
    preset = values.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"{source}: preset must be one of {PRESETS}")
        base = RunConfig.for_preset(preset)
        explicit = {k: v for k, v in values.items()}
        return base.replace(**explicit)
    if "gamma" not in values:
        raise ConfigError(f"{source}: missing gas.gamma")
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(p))


# ------------------------------------------------------------ resolution


def build_profile(cfg: RunConfig):
    try:
        if cfg.shape == "exp1":
            return geometry.exp1(cfg.x_b, cfg.x_c)
        if cfg.shape == "exp2":
            return geometry.exp2(cfg.x_b, cfg.x_c)
        if cfg.shape == "straight":
            return geometry.straight(cfg.x_b, cfg.x_c)
        if cfg.shape == "spherical":
            if cfg.n_dim is None:
                raise ConfigError("spherical profile needs profile.n_dim")
            return geometry.spherical(cfg.n_dim, cfg.x_b, cfg.x_c)
        if cfg.profile_table is None:
            raise ConfigError("table profile needs profile.table")
        return geometry.read_table(cfg.profile_table)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def build_grid(cfg: RunConfig, profile) -> Grid:
    x_b = profile.x_b
    x_c = profile.x_c
    if math.isinf(x_c):
        raise ConfigError("the solver needs a finite domain; set profile.x_c")
    if cfg.n_cells is not None:
        return Grid(x_b, x_c, cfg.n_cells)
    if cfg.dx is None:
        raise ConfigError("set grid.dx or grid.n_cells")
    return Grid.from_spacing(x_b, x_c, cfg.dx)


def _table_data(path, columns):
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] != 3:
        raise ConfigError(f"{path}: expected three columns {columns}")
    return data


def build_data(cfg: RunConfig, profile, gas: GasParameters):
    """``(InitialData, BoundaryData)`` for one value of ``nu``."""
    if cfg.data_kind == "exp-data":
        base = presets.default_exp_data(gas.nu)
        spec = presets.ExpData(
            s0=base.s0 if cfg.s0 is None else cfg.s0,
            r0=base.r0 if cfg.r0 is None else cfg.r0,
            sb_decay=cfg.sb_decay, rb_decay=cfg.rb_decay,
            s0_prime=cfg.s0_prime, r0_prime=cfg.r0_prime,
        )
        try:
            return presets.build_exp_data(spec, profile, gas)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
    if cfg.initial_table is None or cfg.boundary_table is None:
        raise ConfigError("table data needs data.initial_table and data.boundary_table")
    ini = _table_data(cfg.initial_table, "x,S0,R0")
    bnd = _table_data(cfg.boundary_table, "t,SB,RB")
    s0, r0 = PchipInterpolator(ini[:, 0], ini[:, 1]), PchipInterpolator(ini[:, 0], ini[:, 2])
    sb, rb = PchipInterpolator(bnd[:, 0], bnd[:, 1]), PchipInterpolator(bnd[:, 0], bnd[:, 2])
    initial = InitialData(s0, r0, s0.derivative(), r0.derivative(), profile.x_b, profile.x_c)
    boundary = BoundaryData(sb, rb, sb.derivative(), rb.derivative())
    return initial, boundary


def gas_for(cfg: RunConfig, nu: float) -> GasParameters:
    if cfg.gamma is None:
        raise ConfigError("missing gas.gamma")
    try:
        return GasParameters(cfg.gamma, nu)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def resolve(cfg: RunConfig, nu: float):
    """``(SolverConfig, InitialData, BoundaryData)`` for one member of the sweep."""
    gas = gas_for(cfg, nu)
    profile = build_profile(cfg)
    grid = build_grid(cfg, profile)
    initial, boundary = build_data(cfg, profile, gas)
    solver_cfg = SolverConfig(gas, profile, grid, cfg.cfl_ratio, cfg.t_final,
                              cfg.snapshot_stride, cfg.weno_epsilon, cfg.inflow,
                              cfg.outflow_order)
    return solver_cfg, initial, boundary
