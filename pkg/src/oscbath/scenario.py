"""Scenario configuration, presets, trace generation and file output."""
from __future__ import annotations

import copy
import io
import json
import math
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import bare, dressed
from .bare import OccupationKind, OccupationTrace
from .cavity import solve_spectrum, transform_matrix, write_spectrum_csv
from .errors import ConfigError, NumericalError, OscBathError
from .model import CavitySpec, ModelParams, bose_occupation
from .quadrature import QuadratureSpec

MODES = ("bare_finite", "bare_continuum", "dressed_finite", "dressed_continuum",
         "compare_all", "divergence_probe")
FINITE_MODES = ("bare_finite", "dressed_finite")

_FIG_PARAMS = {"omega_bar": 1.0, "g": 0.1, "beta": 2.0, "n0_initial": 1.0}
_FIG_GRID = {"t_min": 1.0, "t_max": 100.0, "points": 200, "spacing": "log"}

PRESETS = {
    "fig1": {"params": _FIG_PARAMS, "mode": "bare_continuum", "time_grid": _FIG_GRID},
    "fig2": {"params": _FIG_PARAMS, "mode": "dressed_continuum", "time_grid": _FIG_GRID},
    "invariance": {"params": _FIG_PARAMS, "mode": "compare_all", "time_grid": _FIG_GRID,
                   "cavity": {"R": 60.0, "N": 256}, "n0_sweep": [0.0, 1.0, 5.0]},
    "divergence-probe": {"params": _FIG_PARAMS, "mode": "divergence_probe", "time_grid": _FIG_GRID,
                         "options": {"cutoffs": [100.0, 1000.0]},
                         "quad": {"max_panels": 400_000}},
}


@dataclass(frozen=True)
class TimeGrid:
    t_min: float
    t_max: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.spacing not in ("linear", "log"):
            raise ConfigError("time_grid.spacing must be 'linear' or 'log'")
        if not (self.t_min >= 0 and self.t_max > self.t_min):
            raise ConfigError("time_grid needs 0 <= t_min < t_max")
        if int(self.points) != self.points or self.points < 2:
            raise ConfigError("time_grid.points must be an integer >= 2")
        if self.spacing == "log" and self.t_min <= 0:
            raise ConfigError("log spacing needs t_min > 0")

    def times(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.t_min, self.t_max, int(self.points))
        return np.linspace(self.t_min, self.t_max, int(self.points))


@dataclass(frozen=True)
class OutputSpec:
    path: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ConfigError("output.format must be 'csv' or 'json'")


@dataclass(frozen=True)
class ScenarioConfig:
    params: ModelParams
    mode: str
    time_grid: TimeGrid
    cavity: Optional[CavitySpec] = None
    quad: QuadratureSpec = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-11)
    n0_sweep: Optional[tuple] = None
    output: OutputSpec = OutputSpec()
    include_vacuum: bool = False
    on_shell: bool = True
    cutoffs: tuple = (100.0, 1000.0)
    name: str = "custom"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode in FINITE_MODES and self.cavity is None:
            raise ConfigError(f"mode {self.mode} needs a cavity block")

    def param_sets(self):
        if not self.n0_sweep:
            return [self.params]
        return [self.params.with_(n0_initial=float(n)) for n in self.n0_sweep]

    def meta(self) -> dict:
        return {
            "scenario": self.name,
            "mode": self.mode,
            "params": self.params.as_dict(),
            "cavity": self.cavity.as_dict() if self.cavity else None,
            "quad": {"rel_tol": self.quad.rel_tol, "abs_tol": self.quad.abs_tol,
                     "max_panels": self.quad.max_panels},
            "time_grid": {"t_min": self.time_grid.t_min, "t_max": self.time_grid.t_max,
                          "points": self.time_grid.points, "spacing": self.time_grid.spacing},
            "n0_sweep": list(self.n0_sweep) if self.n0_sweep else None,
            "options": {"include_vacuum": self.include_vacuum, "on_shell": self.on_shell,
                        "cutoffs": list(self.cutoffs)},
            "git_describe": git_describe(),
        }


_TOP_KEYS = {"name", "params", "mode", "cavity", "time_grid", "quad", "n0_sweep", "output", "options"}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _take(block: dict, allowed: set, where: str) -> dict:
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(block) - allowed
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")
    return block


def config_from_dict(d: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from its JSON-shaped tree; invalid input raises ConfigError."""
    try:
        _take(d, _TOP_KEYS, "config")
        if "params" not in d or "mode" not in d or "time_grid" not in d:
            raise ConfigError("config needs params, mode and time_grid")
        p = _take(d["params"], {"omega_bar", "g", "beta", "n0_initial"}, "params")
        params = ModelParams(float(p["omega_bar"]), float(p["g"]), float(p["beta"]),
                             float(p.get("n0_initial", 0.0)))
        tg = _take(d["time_grid"], {"t_min", "t_max", "points", "spacing"}, "time_grid")
        grid = TimeGrid(float(tg["t_min"]), float(tg["t_max"]), tg["points"], tg.get("spacing", "linear"))
        cav = None
        if d.get("cavity") is not None:
            c = _take(d["cavity"], {"R", "N"}, "cavity")
            cav = CavitySpec(float(c["R"]), c["N"])
        q = _take(d.get("quad", {}), {"rel_tol", "abs_tol", "max_panels"}, "quad")
        quad = QuadratureSpec(rel_tol=float(q.get("rel_tol", 1e-9)), abs_tol=float(q.get("abs_tol", 1e-11)),
                              max_panels=int(q.get("max_panels", 50_000)))
        o = _take(d.get("output", {}), {"path", "format"}, "output")
        out = OutputSpec(o.get("path"), o.get("format", "csv"))
        opt = _take(d.get("options", {}), {"include_vacuum", "on_shell", "cutoffs"}, "options")
        sweep = d.get("n0_sweep")
        if sweep is not None:
            sweep = tuple(float(x) for x in sweep)
            if any(x < 0 for x in sweep):
                raise ConfigError("n0_sweep entries must be >= 0")
        cutoffs = tuple(float(x) for x in opt.get("cutoffs", (100.0, 1000.0)))
        if any(L <= 10 * params.omega_bar for L in cutoffs):
            raise ConfigError("cutoffs must exceed 10 omega_bar")
        return ScenarioConfig(params=params, mode=d["mode"], time_grid=grid, cavity=cav, quad=quad,
                              n0_sweep=sweep, output=out,
                              include_vacuum=bool(opt.get("include_vacuum", False)),
                              on_shell=bool(opt.get("on_shell", True)), cutoffs=cutoffs,
                              name=str(d.get("name", "custom")))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc.__class__.__name__}: {exc}") from exc


def preset_dict(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return _merge(PRESETS[name], {"name": name})


def load_config(path=None, preset: Optional[str] = None, overrides: Optional[dict] = None) -> ScenarioConfig:
    """Preset values, then the JSON file at ``path``, then ``overrides``."""
    d = preset_dict(preset) if preset else {}
    if path is not None:
        try:
            d = _merge(d, json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if overrides:
        d = _merge(d, overrides)
    if not d:
        raise ConfigError("give a preset or a config file")
    return config_from_dict(d)


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


# --------------------------------------------------------------------------
# running

@dataclass
class LabelledTrace:
    label: str
    trace: OccupationTrace


@dataclass
class ScenarioRun:
    config: ScenarioConfig
    traces: list = field(default_factory=list)
    spectrum: object = None


def _with_context(fn, mode: str, t, *args):
    try:
        return fn(*args)
    except NumericalError as exc:
        raise type(exc)(f"[mode={mode}, t={t}] {exc}") from exc


def run_scenario(config: ScenarioConfig) -> ScenarioRun:
    times = config.time_grid.times()
    run = ScenarioRun(config)
    modes = (["bare_finite", "bare_continuum", "dressed_finite", "dressed_continuum"]
             if config.mode == "compare_all" else [config.mode])
    if config.mode == "compare_all" and config.cavity is None:
        modes = ["bare_continuum", "dressed_continuum"]
    sweep = bool(config.n0_sweep)
    spectrum = T = None
    if any(m in FINITE_MODES for m in modes):
        spectrum = _with_context(solve_spectrum, "spectrum", None, config.params, config.cavity)
        T = _with_context(transform_matrix, "spectrum", None, config.params, spectrum)
        run.spectrum = spectrum
    for params in config.param_sets():
        suffix = f"@n0={params.n0_initial:g}" if sweep else ""
        for mode in modes:
            if mode == "bare_finite":
                tr = bare.trace_bare_finite(spectrum, T, params, times, config.include_vacuum)
            elif mode == "dressed_finite":
                tr = dressed.trace_dressed_finite(spectrum, T, params, times)
            elif mode == "bare_continuum":
                vals = np.array([_with_context(bare.occupation_bare_continuum, mode, float(t),
                                               params, float(t), config.quad) for t in times])
                tr = OccupationTrace(times, vals, OccupationKind.BARE_CONTINUUM, params)
            elif mode == "dressed_continuum":
                vals = np.array([_with_context(dressed.occupation_dressed_continuum, mode, float(t),
                                               params, float(t), config.quad, config.on_shell)
                                 for t in times])
                tr = OccupationTrace(times, vals, OccupationKind.DRESSED_CONTINUUM, params)
            else:
                for L in config.cutoffs:
                    vals = np.array([_with_context(bare.vacuum_divergence_probe, mode, float(t),
                                                   params, float(t), L, config.quad) for t in times])
                    # the probe is a cutoff integral, stored on the bare-continuum footing
                    tr = OccupationTrace(times, vals, OccupationKind.BARE_CONTINUUM, params)
                    run.traces.append(LabelledTrace(f"vacuum_probe[Lambda={L:g}]{suffix}", tr))
                continue
            run.traces.append(LabelledTrace(mode + suffix, tr))
    return run


# --------------------------------------------------------------------------
# output

def _fmt(x: float) -> str:
    return repr(float(x))


def render_csv(run: ScenarioRun) -> str:
    buf = io.StringIO()
    meta = json.dumps(run.config.meta(), sort_keys=True)
    buf.write(f"# meta: {meta}\n")
    buf.write("t,value,kind\n")
    for lt in run.traces:
        for t, v in zip(lt.trace.times, lt.trace.values):
            buf.write(f"{_fmt(t)},{_fmt(v)},{lt.label}\n")
    return buf.getvalue()


def render_json(run: ScenarioRun) -> str:
    doc = {"meta": run.config.meta()}
    series = {lt.label: [[float(t), float(v)] for t, v in zip(lt.trace.times, lt.trace.values)]
              for lt in run.traces}
    doc["series"] = next(iter(series.values())) if len(series) == 1 else series
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def write_outputs(run: ScenarioRun, path=None, fmt: Optional[str] = None, spectrum_path=None) -> str:
    fmt = fmt or run.config.output.format
    text = render_csv(run) if fmt == "csv" else render_json(run)
    path = path or run.config.output.path
    if path:
        Path(path).write_text(text)
    if spectrum_path:
        if run.spectrum is None:
            raise ConfigError("spectrum output needs a finite-cavity mode")
        write_spectrum_csv(run.spectrum, spectrum_path)
    return text


# --------------------------------------------------------------------------
# comparison

@dataclass(frozen=True)
class ComparisonReport:
    asymptote_bare: float
    asymptote_dressed: float
    bose_reference: float
    max_rel_gap: float
    n0_independence_spread: float
    t_eval: float

    def __post_init__(self):
        for k in ("asymptote_bare", "asymptote_dressed", "bose_reference", "max_rel_gap",
                  "n0_independence_spread"):
            v = getattr(self, k)
            if not (math.isfinite(v) and v >= 0):
                raise NumericalError(f"{k} = {v} is not a finite non-negative number")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("asymptote_bare", "asymptote_dressed", "bose_reference",
                                              "max_rel_gap", "n0_independence_spread", "t_eval")}


def compare_asymptotes(config: ScenarioConfig, n0_values=None) -> ComparisonReport:
    """Both continuum occupations at t_max against the Bose value at omega_bar."""
    t = config.time_grid.t_max
    if t < 100 / config.params.omega_bar:
        raise ConfigError("compare needs t_max >= 100 / omega_bar")
    sweep = list(n0_values) if n0_values is not None else list(config.n0_sweep or [config.params.n0_initial])
    bare_vals, dressed_vals = [], []
    for n0 in sweep:
        p = config.params.with_(n0_initial=float(n0))
        bare_vals.append(_with_context(bare.occupation_bare_continuum, "compare", t, p, t, config.quad))
        dressed_vals.append(_with_context(dressed.occupation_dressed_continuum, "compare", t, p, t,
                                          config.quad, config.on_shell))
    i = sweep.index(config.params.n0_initial) if config.params.n0_initial in sweep else 0
    ref = bose_occupation(config.params.omega_bar, config.params.beta)
    ab, ad = bare_vals[i], dressed_vals[i]
    spread = max(max(bare_vals) - min(bare_vals), max(dressed_vals) - min(dressed_vals))
    gap = max(abs(ab - ref), abs(ad - ref)) / ref
    return ComparisonReport(ab, ad, ref, gap, spread, t)
