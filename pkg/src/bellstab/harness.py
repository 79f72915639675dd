"""Experiment orchestration behind the command line.

A run is fully described by a :class:`RunConfig`, read from JSON whose keys
carry their units (``chi_A_MHz``, ``T1_A_us``). Every output file embeds the
resolved config and :data:`SCHEMA_VERSION`, and numbers are written with nine
significant digits, so identical configs give byte-identical files. Wall time
is only recorded when asked for, since it would break that.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import re
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analysis import (
    BUDGET_CONFIGURATIONS,
    FitError,
    basis_weights,
    concurrence,
    error_budget,
    fidelity,
    fit_exponential,
    pauli_averages,
)
from .model import DriveParams, SystemParams, build_model, initial_state, tphi_from_t1_t2, zeno_parameter
from .parallel import parallel_map
from .readout import ReadoutModel, condition_on_m1
from .solver import SolverError, evolve, free_decay, steady_state
from .tomography import clifford_suite, reconstruct, simulate_tomography

SCHEMA_VERSION = 1
SIG_DIGITS = 9


class ConfigError(ValueError):
    """Invalid configuration; ``line`` points into the JSON source when known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.source = source

    def __str__(self):
        where = self.source or "config"
        if self.line is not None:
            where = f"{where}:{self.line}"
        return f"{where}: {self.message}"


# ---------------------------------------------------------------- config types

AXIS_NAMES = ("nbar", "omegan_MHz", "omega0_MHz")


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"unknown sweep axis {self.name!r}; expected one of {', '.join(AXIS_NAMES)}")
        if len(self.values) < 1:
            raise ValueError(f"sweep axis {self.name} has no points")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError(f"sweep axis {self.name} must be strictly increasing")
        if any(not math.isfinite(v) or v < 0 for v in self.values):
            raise ValueError(f"sweep axis {self.name} needs finite non-negative values")

    @classmethod
    def linspace(cls, name: str, lo: float, hi: float, points: int) -> "SweepAxis":
        if points < 2:
            raise ValueError(f"sweep axis {name} needs at least 2 points, got {points}")
        if not hi > lo:
            raise ValueError(f"sweep axis {name} needs max > min")
        return cls(name, tuple(float(v) for v in np.linspace(lo, hi, int(points))))


@dataclass(frozen=True)
class SweepGrid:
    """Axes over drive parameters; missing axes stay at the nominal drives."""

    axes: tuple[SweepAxis, ...]
    n_repump: str = "fixed"  # "fixed": nominal index everywhere, "round": round(nbar)

    def __post_init__(self):
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError("sweep axes must be distinct")
        if self.n_repump not in ("fixed", "round"):
            raise ValueError(f"n_repump must be 'fixed' or 'round', got {self.n_repump!r}")

    def points(self, nominal: DriveParams) -> list[DriveParams]:
        """Grid points in row-major order of (nbar, omegan, omega0)."""
        base = {"nbar": (nominal.nbar,), "omegan_MHz": (nominal.omegan,), "omega0_MHz": (nominal.omega0,)}
        for axis in self.axes:
            base[axis.name] = axis.values
        fixed_n = nominal.repump_index
        out = []
        for nbar, omegan, omega0 in itertools.product(base["nbar"], base["omegan_MHz"], base["omega0_MHz"]):
            n = fixed_n if self.n_repump == "fixed" else None
            out.append(replace(nominal, nbar=nbar, omegan=omegan, omega0=omega0, n_repump=n))
        return out


def default_sweep(kappa: float = 1.7) -> SweepGrid:
    """nbar in steps of 0.5 and omegan in steps of kappa/20; both hit (3, kappa/2)."""
    nbar = tuple(0.5 * i for i in range(1, 11))
    omegan = tuple(round(0.05 * i * kappa, 12) for i in range(4, 17))
    return SweepGrid((SweepAxis("nbar", nbar), SweepAxis("omegan_MHz", omegan)))


@dataclass(frozen=True)
class RunConfig:
    system: SystemParams = field(default_factory=SystemParams)
    drives: DriveParams = field(default_factory=DriveParams)
    t_final: float = 10.0  # us
    tol: float = 1e-6
    snapshot_every: float = 0.1  # us
    period_average: bool = False
    ts_list: tuple[float, ...] = tuple(round(0.1 * i, 10) for i in range(101))
    sweep: SweepGrid = field(default_factory=default_sweep)
    m1: ReadoutModel = field(default_factory=ReadoutModel.m1)
    kept_floor: float = 1e-6
    tomo_readout: ReadoutModel = field(default_factory=ReadoutModel.tomography)
    shots: int | None = 500_000
    repetitions: int = 50
    readout_errors: bool = True
    free_decay: float = 0.0  # us of idle evolution before tomography
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if not 0 < self.tol < 1:
            raise ValueError("tol must lie in (0, 1)")
        if not self.snapshot_every > 0:
            raise ValueError("snapshot interval must be positive")
        if len(self.ts_list) < 1 or any(b <= a for a, b in zip(self.ts_list, self.ts_list[1:])):
            raise ValueError("convergence times must be strictly increasing")
        if self.ts_list[0] < 0:
            raise ValueError("convergence times must be non-negative")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be positive or null for exact mode")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")
        if self.free_decay < 0:
            raise ValueError("free decay duration must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not 0 <= self.kept_floor < 1:
            raise ValueError("kept floor must lie in [0, 1)")


# ------------------------------------------------------------------ parsing

def _number(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"{key} must be a number, got {json.dumps(value)}")
    return float(value)


def _time(value, key):
    """A time in us; null or "inf" switch the process off."""
    if value is None or value == "inf":
        return math.inf
    return _number(value, key)


def _integer(value, key):
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"{key} must be an integer, got {json.dumps(value)}")
    return value


def _optional_integer(value, key):
    return None if value is None else _integer(value, key)


def _boolean(value, key):
    if not isinstance(value, bool):
        raise TypeError(f"{key} must be true or false, got {json.dumps(value)}")
    return value


def _number_list(value, key):
    if not isinstance(value, list):
        raise TypeError(f"{key} must be a list of numbers")
    return tuple(_number(v, key) for v in value)


_SYSTEM_KEYS = {
    "chi_A_MHz": ("chi_A", _number),
    "chi_B_MHz": ("chi_B", _number),
    "kappa_MHz": ("kappa", _number),
    "T1_A_us": ("T1_A", _time),
    "T1_B_us": ("T1_B", _time),
    "Tphi_A_us": ("Tphi_A", _time),
    "Tphi_B_us": ("Tphi_B", _time),
    "T2_A_us": ("T2_A", _time),
    "T2_B_us": ("T2_B", _time),
    "n_cavity": ("n_cavity", _integer),
    "p_e_A": ("p_e_A", _number),
    "p_e_B": ("p_e_B", _number),
    "omega_A0_GHz": ("omega_A0_GHz", _number),
    "omega_B0_GHz": ("omega_B0_GHz", _number),
    "omega_c_gg_GHz": ("omega_c_gg_GHz", _number),
    "alpha_A_MHz": ("alpha_A_MHz", _number),
    "alpha_B_MHz": ("alpha_B_MHz", _number),
}
_DRIVE_KEYS = {
    "nbar": ("nbar", _number),
    "omega0_MHz": ("omega0", _number),
    "omegan_MHz": ("omegan", _number),
    "n_repump": ("n_repump", _optional_integer),
    "phase_n_rad": ("phase_n", _number),
    "phase_0_rad": ("phase_0", _number),
}
_SOLVER_KEYS = {
    "t_final_us": ("t_final", _number),
    "tol": ("tol", _number),
    "snapshot_us": ("snapshot_every", _number),
    "period_average": ("period_average", _boolean),
}
_READOUT_KEYS = {
    "mu_gg_sigma": ("mu_gg", _number),
    "mu_not_sigma": ("mu_not", _number),
    "separation_sigma": ("separation", _number),
    "sigma_gg_ratio": ("sigma_gg_ratio", _number),
    "threshold_sigma": ("threshold", _number),
    "eps_gg": ("eps_gg", _number),
    "eps_not": ("eps_not", _number),
}
_POSTSELECT_KEYS = {"kept_floor": ("kept_floor", _number)}
_TOMOGRAPHY_KEYS = {
    "shots": ("shots", _optional_integer),
    "repetitions": ("repetitions", _integer),
    "readout_errors": ("readout_errors", _boolean),
    "free_decay_us": ("free_decay", _number),
}
_CONVERGENCE_KEYS = {"ts_us": ("ts_list", _number_list)}
_TOP_KEYS = ("schema_version", "system", "drives", "solver", "convergence", "sweep", "readout",
             "postselect", "tomography", "seed", "workers")


class _Locator:
    """Best-effort line numbers for keys in the JSON source."""

    def __init__(self, text: str):
        self.text = text

    def line(self, key: str, section: str | None = None) -> int | None:
        start = 0
        if section is not None:
            m = re.search(r'"%s"\s*:' % re.escape(section), self.text)
            if m:
                start = m.end()
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(self.text, start)
        if m is None:
            return None
        return self.text.count("\n", 0, m.start()) + 1


def _no_duplicates(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise _DuplicateKey(key)
        seen[key] = value
    return seen


class _DuplicateKey(Exception):
    pass


def _section(raw: dict, name: str, keys: dict, loc: _Locator, source: str) -> dict:
    block = raw.get(name, {})
    if not isinstance(block, dict):
        raise ConfigError(f"section {name!r} must be an object", loc.line(name), source)
    out = {}
    for key, value in block.items():
        if key not in keys:
            known = ", ".join(keys)
            raise ConfigError(f"unknown key {key!r} in {name!r} (known: {known})", loc.line(key, name), source)
        attr, convert = keys[key]
        try:
            out[attr] = convert(value, key)
        except TypeError as exc:
            raise ConfigError(str(exc), loc.line(key, name), source) from None
    return out


def _build(factory, values: dict, name: str, loc: _Locator, source: str):
    try:
        return factory(**values)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{name}: {exc}", loc.line(name), source) from None


def _readout(values: dict, default: ReadoutModel, name: str, loc, source) -> ReadoutModel:
    if not values:
        return default
    explicit = {"mu_gg", "mu_not"} & values.keys()
    if "separation" in values and explicit:
        raise ConfigError(f"{name}: give either separation_sigma or mu_gg_sigma/mu_not_sigma, not both",
                          loc.line(name), source)
    if "separation" in values:
        return _build(ReadoutModel.balanced, {
            "separation": values["separation"],
            "threshold": values.get("threshold", default.threshold),
            "sigma_gg_ratio": values.get("sigma_gg_ratio", default.sigma_gg_ratio),
            "eps_gg": values.get("eps_gg", default.eps_gg),
            "eps_not": values.get("eps_not", default.eps_not),
        }, name, loc, source)
    merged = {k: getattr(default, k) for k in ("mu_gg", "mu_not", "sigma_gg_ratio", "threshold", "eps_gg", "eps_not")}
    merged.update(values)
    return _build(ReadoutModel, merged, name, loc, source)


def _sweep(raw, drives: DriveParams, kappa: float, loc: _Locator, source: str) -> SweepGrid:
    block = raw.get("sweep")
    if block is None:
        return default_sweep(kappa)
    if not isinstance(block, dict):
        raise ConfigError("section 'sweep' must be an object", loc.line("sweep"), source)
    axes, n_repump = [], "fixed"
    for key, spec in block.items():
        line = loc.line(key, "sweep")
        if key == "n_repump":
            n_repump = spec
            continue
        if key not in AXIS_NAMES:
            raise ConfigError(f"unknown key {key!r} in 'sweep' (known: {', '.join(AXIS_NAMES)}, n_repump)",
                              line, source)
        if not isinstance(spec, dict):
            raise ConfigError(f"sweep axis {key!r} must be an object", line, source)
        try:
            if set(spec) == {"values"}:
                axes.append(SweepAxis(key, _number_list(spec["values"], key)))
            elif set(spec) == {"min", "max", "points"}:
                axes.append(SweepAxis.linspace(key, _number(spec["min"], "min"), _number(spec["max"], "max"),
                                               _integer(spec["points"], "points")))
            else:
                raise ValueError(f"sweep axis {key!r} takes either 'values' or 'min', 'max', 'points'")
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), line, source) from None
    try:
        return SweepGrid(tuple(axes), n_repump)
    except ValueError as exc:
        raise ConfigError(str(exc), loc.line("sweep"), source) from None


def parse_config(text: str, source: str = "config") -> RunConfig:
    """Parse and validate a JSON config; any problem raises :class:`ConfigError`."""
    try:
        raw = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno, source) from None
    except _DuplicateKey as exc:
        raise ConfigError(f"duplicate key {exc.args[0]!r}", _Locator(text).line(exc.args[0]), source) from None
    return config_from_dict(raw, _Locator(text), source)


def config_from_dict(raw, loc: _Locator | None = None, source: str = "config") -> RunConfig:
    loc = loc or _Locator("")
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object", 1, source)
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(f"unknown top-level key {key!r} (known: {', '.join(_TOP_KEYS)})",
                              loc.line(key), source)
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}; this build reads {SCHEMA_VERSION}",
                          loc.line("schema_version"), source)

    sys_values = _section(raw, "system", _SYSTEM_KEYS, loc, source)
    for q in ("A", "B"):
        t2 = sys_values.pop(f"T2_{q}", None)
        if t2 is None:
            continue
        if f"Tphi_{q}" in sys_values:
            raise ConfigError(f"give Tphi_{q}_us or T2_{q}_us, not both", loc.line(f"T2_{q}_us", "system"), source)
        t1 = sys_values.get(f"T1_{q}", getattr(SystemParams(), f"T1_{q}"))
        try:
            sys_values[f"Tphi_{q}"] = math.inf if math.isinf(t2) and math.isinf(t1) else tphi_from_t1_t2(t1, t2)
        except ValueError as exc:
            raise ConfigError(str(exc), loc.line(f"T2_{q}_us", "system"), source) from None
    system = _build(SystemParams, sys_values, "system", loc, source)
    drives = _build(DriveParams, _section(raw, "drives", _DRIVE_KEYS, loc, source), "drives", loc, source)

    values = {}
    values.update(_section(raw, "solver", _SOLVER_KEYS, loc, source))
    values.update(_section(raw, "convergence", _CONVERGENCE_KEYS, loc, source))
    values.update(_section(raw, "postselect", _POSTSELECT_KEYS, loc, source))
    values.update(_section(raw, "tomography", _TOMOGRAPHY_KEYS, loc, source))

    readout = raw.get("readout", {})
    if not isinstance(readout, dict):
        raise ConfigError("section 'readout' must be an object", loc.line("readout"), source)
    for key in readout:
        if key not in ("m1", "tomography"):
            raise ConfigError(f"unknown key {key!r} in 'readout' (known: m1, tomography)",
                              loc.line(key, "readout"), source)
    m1 = _readout(_section(readout, "m1", _READOUT_KEYS, loc, source), ReadoutModel.m1(), "m1", loc, source)
    tomo = _readout(_section(readout, "tomography", _READOUT_KEYS, loc, source), ReadoutModel.tomography(),
                    "tomography", loc, source)
    for key in ("seed", "workers"):
        if key in raw:
            try:
                values[key] = _integer(raw[key], key)
            except TypeError as exc:
                raise ConfigError(str(exc), loc.line(key), source) from None
    sweep = _sweep(raw, drives, system.kappa, loc, source)
    return _build(RunConfig, dict(values, system=system, drives=drives, sweep=sweep, m1=m1, tomo_readout=tomo),
                  "run settings", loc, source)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    return parse_config(text, source=str(path))


def _finite_or_none(x: float):
    return None if math.isinf(x) else x


def _readout_dict(m: ReadoutModel) -> dict:
    return {"mu_gg_sigma": m.mu_gg, "mu_not_sigma": m.mu_not, "sigma_gg_ratio": m.sigma_gg_ratio,
            "threshold_sigma": m.threshold, "eps_gg": m.eps_gg, "eps_not": m.eps_not}


def config_to_dict(cfg: RunConfig) -> dict:
    """Resolved config in the input schema.

    The repump index is written out explicitly, so parsing the result gives a
    config that runs identically and maps back to the same dict.
    """
    s, d = cfg.system, cfg.drives
    return {
        "schema_version": SCHEMA_VERSION,
        "system": {
            "chi_A_MHz": s.chi_A, "chi_B_MHz": s.chi_B, "kappa_MHz": s.kappa,
            "T1_A_us": _finite_or_none(s.T1_A), "T1_B_us": _finite_or_none(s.T1_B),
            "Tphi_A_us": _finite_or_none(s.Tphi_A), "Tphi_B_us": _finite_or_none(s.Tphi_B),
            "n_cavity": s.n_cavity, "p_e_A": s.p_e_A, "p_e_B": s.p_e_B,
            "omega_A0_GHz": s.omega_A0_GHz, "omega_B0_GHz": s.omega_B0_GHz,
            "omega_c_gg_GHz": s.omega_c_gg_GHz, "alpha_A_MHz": s.alpha_A_MHz, "alpha_B_MHz": s.alpha_B_MHz,
        },
        "drives": {"nbar": d.nbar, "omega0_MHz": d.omega0, "omegan_MHz": d.omegan,
                   "n_repump": d.repump_index, "phase_n_rad": d.phase_n, "phase_0_rad": d.phase_0},
        "solver": {"t_final_us": cfg.t_final, "tol": cfg.tol, "snapshot_us": cfg.snapshot_every,
                   "period_average": cfg.period_average},
        "convergence": {"ts_us": list(cfg.ts_list)},
        "sweep": dict({a.name: {"values": list(a.values)} for a in cfg.sweep.axes},
                      n_repump=cfg.sweep.n_repump),
        "readout": {"m1": _readout_dict(cfg.m1), "tomography": _readout_dict(cfg.tomo_readout)},
        "postselect": {"kept_floor": cfg.kept_floor},
        "tomography": {"shots": cfg.shots, "repetitions": cfg.repetitions,
                       "readout_errors": cfg.readout_errors, "free_decay_us": cfg.free_decay},
        "seed": cfg.seed,
        "workers": cfg.workers,
    }


# ------------------------------------------------------------------ output

def _round(x):
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(f"{x:.{SIG_DIGITS}g}") if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{SIG_DIGITS}g}"
    return str(x)


def _config_for_output(cfg: RunConfig) -> dict:
    # Full precision so the run can be repeated from its output. workers
    # never changes results, so it stays out of the files.
    out = config_to_dict(cfg)
    del out["workers"]
    return out


def json_record(command: str, cfg: RunConfig, result: dict) -> str:
    record = {"schema_version": SCHEMA_VERSION, "command": command,
              "config": _config_for_output(cfg), "result": _round(result)}
    return json.dumps(record, indent=2, allow_nan=False) + "\n"


def csv_table(command: str, cfg: RunConfig, columns: list[str], rows: list[list]) -> str:
    """Header comments (schema version, resolved config), then a CSV table."""
    buf = io.StringIO()
    buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
    buf.write(f"# command: {command}\n")
    buf.write("# config: " + json.dumps(_config_for_output(cfg), separators=(",", ":")) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def read_csv_table(text: str) -> tuple[dict, list[dict]]:
    """Inverse of :func:`csv_table`: (header metadata, rows as dicts of strings)."""
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = json.loads(value) if key == "config" else value
        else:
            body.append(line)
    return meta, list(csv.DictReader(body))


def _write(out_dir: Path | None, name: str, text: str):
    if out_dir is None:
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text)


def _state_summary(rho, drives: DriveParams, sys: SystemParams) -> dict:
    try:
        zeno = zeno_parameter(drives, sys)
    except ValueError:
        zeno = None
    return {
        "fidelity": fidelity(rho),
        "concurrence": concurrence(rho),
        "basis_weights": basis_weights(rho),
        "pauli": pauli_averages(rho).as_dict(),
        "zeno_parameter": zeno,
    }


# ------------------------------------------------------------------ commands

def _steady(cfg: RunConfig, drives: DriveParams | None = None):
    model = build_model(cfg.system, drives or cfg.drives)
    return steady_state(model, cfg.t_final, tol=cfg.tol, period_average=cfg.period_average)


def cmd_steady(cfg: RunConfig, out_dir: Path | None = None, timing: bool = False) -> dict:
    """Steady state at ``t_final``: fidelity, concurrence, weights, Pauli vector."""
    start = time.perf_counter()
    ss = _steady(cfg)
    result = _state_summary(ss.rho, cfg.drives, cfg.system)
    result["stationarity_residual"] = ss.residual
    if ss.rho_period_mean is not None:
        result["fidelity_period_mean"] = fidelity(ss.rho_period_mean)
    result["steps"] = {"accepted": ss.stats.accepted, "rejected": ss.stats.rejected,
                       "evaluations": ss.stats.n_evals}
    if timing:
        result["wall_time_s"] = time.perf_counter() - start
    _write(out_dir, "steady.json", json_record("steady", cfg, result))
    return result


def cmd_convergence(cfg: RunConfig, out_dir: Path | None = None, timing: bool = False) -> dict:
    """F(T_S) along one trajectory sampled at ``ts_list``, plus the exponential fit."""
    start = time.perf_counter()
    model = build_model(cfg.system, cfg.drives)
    ts = np.asarray(cfg.ts_list)
    traj = evolve(model, initial_state(cfg.system), float(ts[-1]), tol=cfg.tol, times=ts)
    rows = []
    for t, rho in zip(traj.times, traj.states):
        p = pauli_averages(rho)
        rows.append([float(t), fidelity(rho), p["ZI"], p["IZ"], p["ZZ"], p["XX"], p["YY"]])
    fvals = np.array([r[1] for r in rows])
    result = {"points": len(rows), "fidelity_final": float(fvals[-1])}
    try:
        fit = fit_exponential(traj.times, fvals)
        result["fit"] = {"F_inf": fit.f_inf, "F_0": fit.f_0, "tau_us": fit.tau, "rms": fit.rms}
    except FitError as exc:
        result["fit"] = {"error": str(exc)}
    if timing:
        result["wall_time_s"] = time.perf_counter() - start
    columns = ["T_S_us", "F", "ZI", "IZ", "ZZ", "XX", "YY"]
    _write(out_dir, "convergence.csv", csv_table("convergence", cfg, columns, rows))
    _write(out_dir, "convergence_fit.json", json_record("convergence", cfg, result))
    result["rows"] = rows
    return result


SWEEP_COLUMNS = ["nbar", "omegan_MHz", "omega0_MHz", "n_repump", "F", "residual", "status"]


def _sweep_point(args):
    sys, drives, t_final, tol = args
    row = [drives.nbar, drives.omegan, drives.omega0, drives.repump_index]
    try:
        ss = steady_state(build_model(sys, drives), t_final, tol=tol)
    except (SolverError, ValueError) as exc:
        return row + [math.nan, math.nan, f"error: {exc}"]
    return row + [fidelity(ss.rho), ss.residual, "ok"]


def cmd_sweep(cfg: RunConfig, out_dir: Path | None = None, timing: bool = False) -> dict:
    """Steady-state fidelity on the drive grid; failed points are kept as rows."""
    start = time.perf_counter()
    points = cfg.sweep.points(cfg.drives)
    tasks = [(cfg.system, d, cfg.t_final, cfg.tol) for d in points]
    rows = parallel_map(_sweep_point, tasks, workers=cfg.workers)
    good = [r for r in rows if r[-1] == "ok"]
    result = {"points": len(rows), "failed": len(rows) - len(good)}
    if good:
        best = max(good, key=lambda r: r[4])
        result["max"] = {"F": best[4], "nbar": best[0], "omegan_MHz": best[1], "omega0_MHz": best[2]}
    if timing:
        result["wall_time_s"] = time.perf_counter() - start
    _write(out_dir, "sweep.csv", csv_table("sweep", cfg, SWEEP_COLUMNS, rows))
    result["rows"] = rows
    return result


def plateau_extent(rows, nbar0: float, omegan0: float, tolerance: float = 0.02) -> dict:
    """Relative reach of the F >= max - tolerance region around (nbar0, omegan0).

    Along each drive axis through the centre, walk outwards while grid points
    stay above the threshold. Reports the fractional distance reached on
    either side; the region counts only if the centre itself qualifies.
    """
    good = [r for r in rows if r[-1] == "ok"]
    f_max = max(r[4] for r in good)
    level = f_max - tolerance
    table = {(r[0], r[1]): r[4] for r in good}

    def reach(values, centre, key):
        values = sorted(values)
        if centre not in values or table[key(centre)] < level:
            return 0.0, 0.0
        i = values.index(centre)
        lo = hi = centre
        for v in reversed(values[:i]):
            if table[key(v)] < level:
                break
            lo = v
        for v in values[i + 1:]:
            if table[key(v)] < level:
                break
            hi = v
        return (centre - lo) / centre, (hi - centre) / centre

    nbars = {n for n, o in table if o == omegan0}
    omegans = {o for n, o in table if n == nbar0}
    n_lo, n_hi = reach(nbars, nbar0, lambda v: (v, omegan0))
    o_lo, o_hi = reach(omegans, omegan0, lambda v: (nbar0, v))
    return {"F_max": f_max, "level": level, "nbar": (n_lo, n_hi), "omegan": (o_lo, o_hi)}


def cmd_budget(cfg: RunConfig, out_dir: Path | None = None, timing: bool = False) -> dict:
    start = time.perf_counter()
    budget = error_budget(cfg.system, cfg.drives, t_final=cfg.t_final, tol=cfg.tol, workers=cfg.workers)
    rows = [[name, f, delta] for name, f, delta in budget.rows()]
    result = {"rows": rows}
    if timing:
        result["wall_time_s"] = time.perf_counter() - start
    _write(out_dir, "budget.csv", csv_table("budget", cfg, ["configuration", "F", "delta"], rows))
    return result


def cmd_postselect(cfg: RunConfig, out_dir: Path | None = None, timing: bool = False,
                   threshold: float | None = None) -> dict:
    """Condition the steady state on the in-loop record reading not-GG."""
    start = time.perf_counter()
    ss = _steady(cfg)
    th = cfg.m1.threshold if threshold is None else threshold
    cond = condition_on_m1(ss.rho, cfg.m1, th, floor=cfg.kept_floor)
    result = {
        "threshold_sigma": th,
        "fidelity": fidelity(ss.rho),
        "fidelity_conditioned": fidelity(cond.rho),
        "concurrence": concurrence(ss.rho),
        "concurrence_conditioned": concurrence(cond.rho),
        "kept_fraction": cond.kept_fraction,
        "keep_probability": {"gg": cond.keep_gg, "not": cond.keep_not},
        "usable": cond.usable,
        "basis_weights": basis_weights(ss.rho),
        "basis_weights_conditioned": basis_weights(cond.rho),
    }
    if timing:
        result["wall_time_s"] = time.perf_counter() - start
    _write(out_dir, "postselect.json", json_record("postselect", cfg, result))
    return result


def tomography_statistics(rho_2q, readout, shots: int, repetitions: int, seed: int) -> dict:
    """Mean and spread of reconstructed Pauli averages over seeded repetitions."""
    streams = np.random.SeedSequence(seed).spawn(repetitions)
    recon = np.array([reconstruct(simulate_tomography(rho_2q, readout, shots, np.random.default_rng(s))).values
                      for s in streams])
    spread = recon.std(axis=0, ddof=1) if repetitions > 1 else np.zeros(16)
    return {"mean": recon.mean(axis=0), "std_error": spread}


def cmd_tomo(cfg: RunConfig, out_dir: Path | None = None, timing: bool = False) -> dict:
    """Simulated joint-readout tomography of the steady state."""
    from .analysis import PAULI_LABELS, PauliVector

    start = time.perf_counter()
    ss = _steady(cfg)
    rho = ss.rho
    if cfg.free_decay > 0:
        rho = free_decay(rho, build_model(cfg.system, cfg.drives), cfg.free_decay, tol=cfg.tol)
    exact = pauli_averages(rho)
    readout = cfg.tomo_readout if cfg.readout_errors else None
    seq = np.random.SeedSequence(cfg.seed)
    single_seed, stats_seed, suite_seed = (int(s.generate_state(1)[0]) for s in seq.spawn(3))
    measured = reconstruct(simulate_tomography(rho, readout, cfg.shots, single_seed))
    result = {
        "shots": cfg.shots,
        "free_decay_us": cfg.free_decay,
        "fidelity_state": fidelity(rho),
        "fidelity_tomography": measured.fidelity(),
        "concurrence_state": concurrence(rho),
        "concurrence_tomography": concurrence(measured.to_density_matrix()),
        "pauli_state": exact.as_dict(),
        "pauli_tomography": measured.as_dict(),
    }
    if cfg.shots is not None:
        st = tomography_statistics(rho, readout, cfg.shots, cfg.repetitions, stats_seed)
        result["repetitions"] = cfg.repetitions
        result["pauli_std_error"] = dict(zip(PAULI_LABELS, st["std_error"]))
        result["mean_std_error"] = float(st["std_error"][1:].mean())
        result["fidelity_tomography_mean"] = PauliVector(st["mean"]).fidelity()
    suite = clifford_suite(readout, cfg.shots, suite_seed)
    fids = np.array(list(suite.values()))
    result["clifford"] = {"mean": fids.mean(), "min": fids.min(), "max": fids.max()}
    if timing:
        result["wall_time_s"] = time.perf_counter() - start
    _write(out_dir, "tomo.json", json_record("tomo", cfg, result))
    _write(out_dir, "clifford.csv", csv_table("tomo", cfg, ["state", "F"], [[k, v] for k, v in suite.items()]))
    return result


COMMANDS = {
    "steady": cmd_steady,
    "convergence": cmd_convergence,
    "sweep": cmd_sweep,
    "budget": cmd_budget,
    "postselect": cmd_postselect,
    "tomo": cmd_tomo,
}

__all__ = [
    "BUDGET_CONFIGURATIONS", "COMMANDS", "ConfigError", "RunConfig", "SCHEMA_VERSION", "SweepAxis", "SweepGrid",
    "cmd_budget", "cmd_convergence", "cmd_postselect", "cmd_steady", "cmd_sweep", "cmd_tomo", "config_from_dict",
    "config_to_dict", "csv_table", "default_sweep", "json_record", "load_config", "parse_config", "plateau_extent",
    "read_csv_table", "tomography_statistics",
]
