"""Scenario configuration, orchestration, sweeps and on-disk formats.

A scenario is described by a :class:`ScenarioConfig`, usually read from an INI file::

    [scenario]
    kind = peakon            ; peakon | breather | gaussian | blowup_sweep | custom
    name = my-run
    integrator = particle    ; particle | spectral | both
    theta = pi/4             ; number, or k*pi/n
    seed = 0

    [grid]
    L = 20
    N = 4096

    [time]
    dt = auto                ; auto picks a step that is stable for all time
    t_end = 1.0              ; blowup_sweep accepts auto (1.5 T*)
    snapshot_every = 0
    cfl = auto
    continue_after_blowup = auto ; particles only: keep stepping after the first flag

    [data]
    a = 1.0                  ; peakon amplitude / Gaussian height / sech^2 amplitude A
    phase = 0.0
    sigma = 0.05             ; peakon mollifier width
    x0 = 0.0
    width = auto             ; Gaussian or sech^2 width
    ramp = auto              ; phase ramp lambda in e^{i lambda x}
    file = none              ; custom scenario: snapshot JSON with the initial m
    thetas = 0, pi/8         ; blowup_sweep: one run per (theta, amplitude)
    amplitudes = 4

    [diagnostics]
    enabled = yes
    besov_s = none           ; adds a B^s_{2,2} column when set
    q_form = corrected       ; corrected | literal

    [thresholds]
    monitor = 1e6
    monitor_resolution_fraction = auto
    spacing_ratio = 1e-6
    linf_factor = 1e6

Every ``auto`` resolves to a scenario default; the resolved config is what gets echoed.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import particles as pa
from . import spectral as sp
from .diagnostics import CSV_COLUMNS, BlowupPrediction, predict_blowup
from .fields import Q_FORMS
from .grid import Grid, GridFunction, InvalidParameterError, lp_norm
from .helmholtz import u_from_m
from .littlewood_paley import BesovParams, besov_norm
from .peakon import PeakonParams, TrackingFailure, mollified_peakon_momentum, peakon_tracking_error
from .thresholds import BlowupThresholds

SCENARIOS = ("peakon", "breather", "gaussian", "blowup_sweep", "custom")
INTEGRATORS = ("particle", "spectral", "both")
WORKERS_ENV = "PEAKONLAB_WORKERS"


class ConfigError(InvalidParameterError):
    """A scenario configuration is malformed or out of range."""


# --- configuration -------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = "gaussian"
    name: str = ""
    integrator: str | None = None
    theta: float | None = None
    seed: int = 0
    L: float | None = None
    N: int | None = None
    dt: float | None = None
    t_end: float | None = None
    snapshot_every: int = 0
    cfl: float | None = None
    continue_after_blowup: bool | None = None
    a: float | None = None
    phase: float = 0.0
    sigma: float | None = None
    x0: float = 0.0
    width: float | None = None
    ramp: float | None = None
    data_file: str | None = None
    thetas: tuple = ()
    amplitudes: tuple = ()
    diagnostics: bool = True
    besov_s: float | None = None
    q_form: str = "corrected"
    monitor: float = 1e6
    monitor_resolution_fraction: float | None = None
    spacing_ratio: float = 1e-6
    linf_factor: float = 1e6

    def thresholds(self) -> BlowupThresholds:
        return BlowupThresholds(monitor=self.monitor, linf_factor=self.linf_factor,
                                spacing_ratio=self.spacing_ratio,
                                monitor_resolution_fraction=self.monitor_resolution_fraction)


_DEFAULTS = {
    "peakon": dict(continue_after_blowup=True, integrator="particle", theta=0.0, L=20.0, N=4096, t_end=1.0, a=1.0, sigma=0.05),
    "breather": dict(continue_after_blowup=True, integrator="particle", theta=math.pi / 2, L=20.0, N=8192, t_end=1.0, a=1.0,
                     sigma=0.025),
    "gaussian": dict(integrator="spectral", theta=0.0, L=20.0, N=4096, t_end=1.0, a=1.0, width=1.0,
                     ramp=1.0),
    "blowup_sweep": dict(integrator="both", theta=0.0, L=5.0, N=32768, a=4.0, width=0.01, ramp=0.0,
                         monitor_resolution_fraction=0.1),
    "custom": dict(integrator="spectral", theta=0.0, L=20.0, N=1024, t_end=1.0),
}


def resolve(cfg: ScenarioConfig) -> ScenarioConfig:
    """Fill scenario defaults for unset fields and validate everything."""
    if cfg.kind not in SCENARIOS:
        raise ConfigError(f"unknown scenario {cfg.kind!r}; expected one of {', '.join(SCENARIOS)}")
    updates = {}
    for key, val in _DEFAULTS[cfg.kind].items():
        if getattr(cfg, key) is None:
            updates[key] = val
    if not cfg.name:
        updates["name"] = cfg.kind
    if cfg.continue_after_blowup is None and "continue_after_blowup" not in updates:
        updates["continue_after_blowup"] = False
    cfg = replace(cfg, **updates)
    if cfg.kind == "blowup_sweep":
        if not cfg.thetas:
            cfg = replace(cfg, thetas=(cfg.theta,))
        if not cfg.amplitudes:
            cfg = replace(cfg, amplitudes=(cfg.a,))
    _validate(cfg)
    return cfg


def _validate(c: ScenarioConfig):
    def positive(name, v):
        if v is not None and not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ConfigError(f"{name} must be positive, got {v!r}")

    if c.integrator not in INTEGRATORS:
        raise ConfigError(f"integrator must be one of {', '.join(INTEGRATORS)}, got {c.integrator!r}")
    for th in (c.theta,) + tuple(c.thetas):
        if not (0.0 <= th < math.pi):
            raise ConfigError(f"theta must lie in [0, pi), got {th!r}")
    for name in ("L", "dt", "cfl", "a", "sigma", "width", "monitor", "spacing_ratio",
                 "linf_factor", "monitor_resolution_fraction"):
        positive(name, getattr(c, name))
    for amp in c.amplitudes:
        positive("amplitudes", amp)
    if c.t_end is not None and not (math.isfinite(c.t_end) and c.t_end >= 0):
        raise ConfigError(f"t_end must be >= 0, got {c.t_end!r}")
    try:
        Grid(c.L, c.N)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from None
    if c.snapshot_every < 0:
        raise ConfigError(f"snapshot_every must be >= 0, got {c.snapshot_every}")
    if c.q_form not in Q_FORMS:
        raise ConfigError(f"q_form must be one of {', '.join(Q_FORMS)}, got {c.q_form!r}")
    if not 0.0 <= c.phase < 2 * math.pi:
        raise ConfigError(f"phase must lie in [0, 2pi), got {c.phase!r}")


_PI_RE = re.compile(r"^\s*([-+]?[0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def parse_number(text: str) -> float:
    """Float, or a multiple of pi written as ``pi``, ``3pi/4``, ``3*pi/4``."""
    s = text.strip().lower()
    mt = _PI_RE.match(s)
    if mt:
        num = mt.group(1)
        coef = 1.0 if num in ("", "+") else -1.0 if num == "-" else float(num)
        den = float(mt.group(2)) if mt.group(2) else 1.0
        return coef * math.pi / den
    return float(s)


def _auto(text):
    return text is None or text.strip().lower() in ("auto", "none", "")


_KEYS = {
    "scenario": {"kind": "kind", "name": "name", "integrator": "integrator", "theta": "theta",
                 "seed": "seed"},
    "grid": {"l": "L", "n": "N"},
    "time": {"dt": "dt", "t_end": "t_end", "snapshot_every": "snapshot_every", "cfl": "cfl",
             "continue_after_blowup": "continue_after_blowup"},
    "data": {"a": "a", "phase": "phase", "sigma": "sigma", "x0": "x0", "width": "width",
             "ramp": "ramp", "file": "data_file", "thetas": "thetas", "amplitudes": "amplitudes"},
    "diagnostics": {"enabled": "diagnostics", "besov_s": "besov_s", "q_form": "q_form"},
    "thresholds": {"monitor": "monitor", "monitor_resolution_fraction": "monitor_resolution_fraction",
                   "spacing_ratio": "spacing_ratio", "linf_factor": "linf_factor"},
}
_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _convert(attr: str, raw: str):
    typ = _TYPES[attr]
    if typ == "tuple":
        return tuple(parse_number(p) for p in raw.split(",") if p.strip())
    if typ.startswith("bool"):
        if "None" in typ and _auto(raw):
            return None
        low = raw.strip().lower()
        if low in ("yes", "true", "on", "1"):
            return True
        if low in ("no", "false", "off", "0"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if "None" in typ and _auto(raw):
        return None
    if typ.startswith("int"):
        return int(raw)
    if typ.startswith("float"):
        return parse_number(raw)
    return raw.strip()


def config_from_ini(text: str, base_dir: str | Path | None = None) -> ScenarioConfig:
    """Parse INI text into a resolved :class:`ScenarioConfig`; unknown keys are errors."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    values = {}
    for section in cp.sections():
        keys = _KEYS.get(section.lower())
        if keys is None:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            attr = keys.get(key.lower())
            if attr is None:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            try:
                values[attr] = _convert(attr, raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from None
    if values.get("data_file") and base_dir is not None:
        p = Path(values["data_file"])
        if not p.is_absolute():
            values["data_file"] = str(Path(base_dir) / p)
    return resolve(ScenarioConfig(**values))


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return config_from_ini(text, base_dir=path.parent)


def config_to_ini(cfg: ScenarioConfig) -> str:
    """INI text that reproduces ``cfg`` exactly (floats are written with ``repr``)."""
    cp = configparser.ConfigParser()
    for section, keys in _KEYS.items():
        cp[section] = {}
        for key, attr in keys.items():
            v = getattr(cfg, attr)
            if v is None:
                s = "auto"
            elif isinstance(v, bool):
                s = "yes" if v else "no"
            elif isinstance(v, tuple):
                s = ", ".join(repr(float(x)) for x in v)
            elif isinstance(v, float):
                s = repr(v)
            else:
                s = str(v)
            cp[section][key] = s
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


# --- initial data ----------------------------------------------------------------------------

def sech2_derivative(x, width: float) -> np.ndarray:
    """``d/dx sech^2(x/w)`` written with ``exp(-2|s|)`` so large ``|x|/w`` cannot overflow."""
    s = np.asarray(x, dtype=float) / width
    e = np.exp(-2.0 * np.abs(s))
    sech2 = 4.0 * e / (1.0 + e) ** 2
    tanh = np.sign(s) * (1.0 - e) / (1.0 + e)
    return -2.0 * sech2 * tanh / width


def blowup_datum(grid: Grid, amplitude: float, width: float, ramp: float = 0.0,
                 x0: float = 0.0) -> GridFunction:
    """Steep antisymmetric datum ``A d/dx[sech^2((x-x0)/w)] e^{i ramp x}``."""
    d = grid.wrap(grid.x - x0)
    return GridFunction(grid, amplitude * sech2_derivative(d, width) * np.exp(1j * ramp * grid.x))


def gaussian_datum(grid: Grid, a: float, width: float, ramp: float, phase: float = 0.0,
                   x0: float = 0.0) -> GridFunction:
    d = grid.wrap(grid.x - x0)
    return GridFunction(grid, a * np.exp(-0.5 * (d / width) ** 2 + 1j * (phase + ramp * grid.x)))


def random_smooth_datum(grid: Grid, seed: int, modes: int = 12) -> GridFunction:
    """Band-limited datum with Gaussian-decaying random coefficients on ``|n| <= modes``."""
    rng = np.random.default_rng(seed)
    n = np.arange(-modes, modes + 1)
    coef = (rng.standard_normal(n.size) + 1j * rng.standard_normal(n.size)) * np.exp(-0.1 * n * n)
    phase = np.exp(1j * np.pi / grid.L * np.outer(grid.x + grid.L, n))
    return GridFunction(grid, phase @ coef / modes)


def initial_momentum(cfg: ScenarioConfig, amplitude: float | None = None) -> tuple[GridFunction, float]:
    """``(m0, theta)`` for a resolved config."""
    a = cfg.a if amplitude is None else amplitude
    if cfg.kind in ("peakon", "breather"):
        grid = Grid(cfg.L, cfg.N)
        p = PeakonParams(a=a, theta=cfg.theta, phi=cfg.phase, x0=cfg.x0)
        return mollified_peakon_momentum(p, cfg.sigma, grid), cfg.theta
    if cfg.kind == "gaussian":
        grid = Grid(cfg.L, cfg.N)
        return gaussian_datum(grid, a, cfg.width, cfg.ramp, cfg.phase, cfg.x0), cfg.theta
    if cfg.kind == "blowup_sweep":
        grid = Grid(cfg.L, cfg.N)
        return blowup_datum(grid, a, cfg.width, cfg.ramp, cfg.x0), cfg.theta
    if cfg.data_file:
        m, _, _ = read_snapshot_json(cfg.data_file)
        return m, cfg.theta
    return random_smooth_datum(Grid(cfg.L, cfg.N), cfg.seed), cfg.theta


# --- artifacts -----------------------------------------------------------------------------

@dataclass
class IntegratorRun:
    integrator: str
    dt: float
    series: list = field(default_factory=list)
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    velocities: list = field(default_factory=list)
    blown_up: bool = False
    blowup_time: float | None = None
    blowup_reason: str | None = None
    tracking: object = None


@dataclass
class RunArtifact:
    config: ScenarioConfig
    theta: float
    amplitude: float
    prediction: BlowupPrediction
    runs: dict = field(default_factory=dict)
    cross_check: list = field(default_factory=list)

    def blowup_report(self) -> dict:
        p = self.prediction
        row = {"theta": self.theta, "amplitude": self.amplitude, "triggered": p.triggered,
               "margin": p.margin, "T_star": p.T_star, "C0": p.C0}
        for name, r in self.runs.items():
            row[f"{name}_blown_up"] = r.blown_up
            row[f"{name}_T_obs"] = r.blowup_time
            row[f"{name}_reason"] = r.blowup_reason
            row[f"{name}_within"] = (bool(p.triggered and r.blown_up
                                          and r.blowup_time <= 1.05 * p.T_star)
                                     if p.triggered else None)
        return row


def _auto_dt(cfg, m0, theta):
    sp_opts = sp.SpectralOptions(q_form=cfg.q_form) if cfg.cfl is None else \
        sp.SpectralOptions(q_form=cfg.q_form, cfl=cfg.cfl)
    dts = []
    if cfg.integrator in ("spectral", "both"):
        dts.append(sp.cfl_dt(m0, sp_opts))
    if cfg.integrator in ("particle", "both"):
        ens = pa.init_particles(m0, theta, q_form=cfg.q_form)
        dts.append(pa.cfl_dt(ens) if cfg.cfl is None else pa.cfl_dt(ens, cfg.cfl))
    return min(dts), sp_opts


def _t_end(cfg, pred, m0):
    if cfg.t_end is not None:
        return cfg.t_end
    if pred.triggered:
        return 1.5 * pred.T_star
    return 1.0 / max(lp_norm(m0, 1) ** 2, 1e-300)


def _besov(cfg):
    if cfg.besov_s is None:
        return None
    params = BesovParams(cfg.besov_s, 2.0, 2.0)
    return lambda m: besov_norm(m, params)


def _run_spectral(cfg, m0, theta, dt, t_end, opts, thr) -> IntegratorRun:
    besov = _besov(cfg)
    res = sp.run(sp.MomentumState.initial(m0, theta), dt, t_end, cfg.snapshot_every, opts, thr,
                 diagnostics=cfg.diagnostics, m_ref=m0)
    out = IntegratorRun("spectral", dt)
    for s in res.snapshots:
        if s.m.blown_up:
            continue
        out.times.append(s.t)
        out.snapshots.append(s.m)
        out.velocities.append(u_from_m(s.m))
    out.series = [replace(r, besov_h_s=besov(m)) if besov else r
                  for r, m in zip(res.series, out.snapshots)]
    f = res.final
    out.blown_up, out.blowup_time, out.blowup_reason = f.blown_up, f.blowup_time, f.blowup_reason
    return out


def _run_particle(cfg, m0, theta, dt, t_end, thr) -> IntegratorRun:
    besov = _besov(cfg)
    ens = pa.init_particles(m0, theta, q_form=cfg.q_form)
    res = pa.run_particles(ens, dt, t_end, cfg.snapshot_every, thr,
                           stop_on_blowup=not cfg.continue_after_blowup,
                           diagnostics=cfg.diagnostics, m_ref=m0)
    out = IntegratorRun("particle", dt)
    for e in res.snapshots:
        out.times.append(e.t)
        out.snapshots.append(pa.reconstruct_m(e))
        out.velocities.append(pa.velocity_on_grid(e)[0])
    out.series = [replace(r, besov_h_s=besov(m)) if besov else r
                  for r, m in zip(res.series, out.snapshots)]
    f = res.final
    out.blown_up, out.blowup_time, out.blowup_reason = f.blown_up, f.blowup_time, f.blowup_reason
    return out


def run_scenario(cfg: ScenarioConfig, theta: float | None = None,
                 amplitude: float | None = None) -> RunArtifact:
    """Build the datum, run the requested integrator(s) and attach diagnostics.

    ``theta`` and ``amplitude`` override the config (used when a ``blowup_sweep`` config is
    expanded into single runs).  Blow-up is reported in the artifact, never raised.
    """
    cfg = resolve(cfg)
    m0, th = initial_momentum(cfg, amplitude)
    th = th if theta is None else theta
    amp = cfg.a if amplitude is None else amplitude
    if not 0.0 <= th < math.pi:
        raise ConfigError(f"theta must lie in [0, pi), got {th!r}")
    pred = predict_blowup(m0, th, q_form=cfg.q_form)
    t_end = _t_end(cfg, pred, m0)
    dt_auto, opts = _auto_dt(cfg, m0, th)
    dt = dt_auto if cfg.dt is None else cfg.dt
    if not math.isfinite(dt):
        dt = t_end if t_end > 0 else 1.0
    thr = cfg.thresholds()
    art = RunArtifact(config=cfg, theta=th, amplitude=amp, prediction=pred)
    if cfg.integrator in ("spectral", "both"):
        art.runs["spectral"] = _run_spectral(cfg, m0, th, dt, t_end, opts, thr)
    if cfg.integrator in ("particle", "both"):
        art.runs["particle"] = _run_particle(cfg, m0, th, dt, t_end, thr)
    if cfg.integrator == "both":
        art.cross_check = cross_check(art.runs["spectral"], art.runs["particle"])
    if cfg.kind in ("peakon", "breather"):
        params = PeakonParams(a=amp, theta=th, phi=cfg.phase, x0=cfg.x0)
        for r in art.runs.values():
            if len(r.times) >= 2:
                try:
                    r.tracking = peakon_tracking_error(r.times, r.velocities, params)
                except TrackingFailure as exc:
                    r.tracking = exc
    return art


def cross_check(a: IntegratorRun, b: IntegratorRun) -> list[tuple[float, float]]:
    """Relative L2 distance ``||m_b - m_a|| / ||m_a||`` at snapshot times shared by both runs."""
    out = []
    for t, ma in zip(a.times, a.snapshots):
        for s, mb in zip(b.times, b.snapshots):
            if abs(s - t) <= 1e-9 * max(1.0, abs(t)):
                den = lp_norm(ma, 2)
                out.append((t, lp_norm(mb - ma, 2) / den if den > 0 else math.nan))
                break
    return out


# --- sweeps --------------------------------------------------------------------------------

def expand(cfg: ScenarioConfig) -> list[tuple[ScenarioConfig, float, float]]:
    """One ``(config, theta, amplitude)`` job per run; ``blowup_sweep`` spans its grid of values."""
    cfg = resolve(cfg)
    if cfg.kind == "blowup_sweep":
        return [(cfg, th, amp) for th in cfg.thetas for amp in cfg.amplitudes]
    return [(cfg, cfg.theta, cfg.a if cfg.a is not None else math.nan)]


REPORT_COLUMNS = ("name", "kind", "integrator", "theta", "amplitude", "N", "status", "error",
                  "triggered", "margin", "T_star", "spectral_T_obs", "spectral_reason",
                  "spectral_within", "particle_T_obs", "particle_reason", "particle_within",
                  "l1_drift", "cross_check_final")


def _row(job) -> dict:
    cfg, th, amp = job
    row = {k: None for k in REPORT_COLUMNS}
    row.update(name=cfg.name, kind=cfg.kind, integrator=cfg.integrator, theta=th,
               amplitude=amp, N=cfg.N)
    try:
        art = run_scenario(cfg, theta=th, amplitude=None if math.isnan(amp) else amp)
    except Exception as exc:  # recorded per row, the sweep carries on
        row.update(status="error", error=f"{type(exc).__name__}: {exc}")
        return row
    rep = art.blowup_report()
    row.update({k: rep.get(k) for k in REPORT_COLUMNS if k in rep})
    drifts = [abs(r.series[-1].l1_m - r.series[0].l1_m) / r.series[0].l1_m
              for r in art.runs.values() if len(r.series) >= 2 and r.series[0].l1_m > 0]
    row["l1_drift"] = max(drifts) if drifts else None
    row["cross_check_final"] = art.cross_check[-1][1] if art.cross_check else None
    row["status"] = "ok"
    return row


def worker_count() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError(f"{WORKERS_ENV} must be >= 1, got {n}")
        return n
    cpus = os.process_cpu_count() if hasattr(os, "process_cpu_count") else os.cpu_count()
    return max(1, cpus or 1)


def sweep(configs: list, workers: int | None = None) -> list[dict]:
    """Run every job of every config; rows come back in config order regardless of workers."""
    if not configs:
        raise ConfigError("sweep needs at least one config")
    jobs = [j for c in configs for j in expand(c)]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) == 1:
        return [_row(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_row, jobs))


# --- files ---------------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])


def write_series_csv(path, series):
    cols = list(CSV_COLUMNS)
    if series and series[0].besov_h_s is not None:
        cols.append("besov_h_s")
    write_csv(path, cols, [asdict(r) for r in series])


def write_report_csv(path, rows):
    write_csv(path, REPORT_COLUMNS, rows)


def snapshot_record(t: float, m: GridFunction, theta: float) -> dict:
    return {"t": float(t), "L": m.grid.L, "N": m.grid.N, "theta": float(theta),
            "re": m.values.real.tolist(), "im": m.values.imag.tolist()}


def write_snapshot_json(path, t: float, m: GridFunction, theta: float):
    with open(path, "w") as fh:
        json.dump(snapshot_record(t, m, theta), fh)


def read_snapshot_json(path) -> tuple[GridFunction, float, float]:
    """``(m, t, theta)`` from a snapshot file."""
    try:
        with open(path) as fh:
            d = json.load(fh)
        grid = Grid(float(d["L"]), int(d["N"]))
        vals = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
        return GridFunction(grid, vals), float(d["t"]), float(d["theta"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad snapshot file {path}: {exc}") from None


def write_artifact(art: RunArtifact, out_dir) -> Path:
    """Write config echo, per-integrator diagnostics CSV and snapshots, and the blow-up report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(config_to_ini(art.config))
    for name, r in art.runs.items():
        write_series_csv(out / f"{name}_diagnostics.csv", r.series)
        snap_dir = out / f"{name}_snapshots"
        snap_dir.mkdir(exist_ok=True)
        for i, (t, m) in enumerate(zip(r.times, r.snapshots)):
            write_snapshot_json(snap_dir / f"{i:05d}.json", t, m, art.theta)
    rep = art.blowup_report()
    write_csv(out / "blowup_report.csv", list(rep), [rep])
    if art.cross_check:
        write_csv(out / "cross_check.csv", ["t", "rel_l2"],
                  [{"t": t, "rel_l2": d} for t, d in art.cross_check])
    return out
