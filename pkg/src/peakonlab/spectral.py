"""Eulerian pseudospectral integrator for ``m_t + J m_x = K m`` (RK4 method of lines)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft as sfft

from .fields import check_q_form, check_theta, field_arrays
from .grid import (
    BlownUpStateError,
    Grid,
    GridFunction,
    InvalidParameterError,
    from_fine,
    padded_size,
    to_fine,
)
from .thresholds import BlowupThresholds


class CFLViolation(InvalidParameterError):
    """Requested time step exceeds the advective stability guard."""

    def __init__(self, dt, dt_max):
        super().__init__(f"dt={dt:.3e} exceeds CFL limit {dt_max:.3e}")
        self.dt = dt
        self.dt_max = dt_max


@dataclass(frozen=True)
class SpectralOptions:
    cfl: float = 0.4
    dealias: bool = True
    q_form: str = "corrected"
    pad_factor: float = 1.5
    # exponential filter exp(-alpha (|n|/(N/2))^order), for post-blow-up exploration only
    use_filter: bool = False
    filter_order: int = 8
    filter_alpha: float = 36.0


@dataclass(frozen=True)
class MomentumState:
    t: float
    m: GridFunction
    theta: float
    blown_up: bool = False
    blowup_time: float | None = None
    blowup_reason: str | None = None

    @property
    def grid(self) -> Grid:
        return self.m.grid

    @classmethod
    def initial(cls, m0: GridFunction, theta: float, t: float = 0.0) -> "MomentumState":
        return cls(t=float(t), m=m0, theta=check_theta(theta), blown_up=m0.blown_up,
                   blowup_time=float(t) if m0.blown_up else None,
                   blowup_reason="non-finite" if m0.blown_up else None)

    def flagged(self, reason: str, when: float | None = None) -> "MomentumState":
        return replace(self, blown_up=True, blowup_time=self.t if when is None else when,
                       blowup_reason=reason)


class _Operator:
    """Cached spectral machinery for one grid."""

    _cache: dict = {}

    def __init__(self, grid: Grid, opts: SpectralOptions):
        check_q_form(opts.q_form)
        self.grid = grid
        self.opts = opts
        k = grid.k
        self.k = k
        self.inv = 1.0 / (1.0 + k * k)
        self.ik = 1j * k
        n = grid.point_count
        self.M = padded_size(n, opts.pad_factor) if opts.dealias else n
        if opts.use_filter:
            frac = np.abs(grid.mode_index) / (n / 2)
            self.filt = np.exp(-opts.filter_alpha * frac ** opts.filter_order)
        else:
            self.filt = None

    @classmethod
    def get(cls, grid: Grid, opts: SpectralOptions) -> "_Operator":
        key = (grid, opts)
        op = cls._cache.get(key)
        if op is None:
            if len(cls._cache) > 16:
                cls._cache.clear()
            op = cls._cache[key] = cls(grid, opts)
        return op

    def evaluate(self, m: np.ndarray, theta: float):
        """Return ``(rhs values, max|J|, min J_x)``."""
        n = self.grid.point_count
        mh = sfft.fft(m)
        uh = mh * self.inv
        spec = np.stack([uh, self.ik * uh, mh, self.ik * mh])
        if self.opts.dealias:
            u, ux, mf, mx = to_fine(spec, self.M)
        else:
            u, ux, mf, mx = sfft.ifft(spec, axis=-1)
        f = field_arrays(u, ux, mf, theta, self.opts.q_form)
        r = -f["J"] * mx + f["K"] * mf
        if self.opts.dealias:
            r = sfft.ifft(from_fine(r, n))
        return r, float(np.max(np.abs(f["J"]))), float(np.min(f["J_x"]))

    def cfl_limit(self, max_J: float) -> float:
        if max_J == 0.0:
            return math.inf
        return self.opts.cfl * self.grid.dx / max_J


def rhs(state: MomentumState, opts: SpectralOptions = SpectralOptions()) -> GridFunction:
    """``-J m_x + K m`` with padded products; non-finite output is returned flagged."""
    if state.blown_up:
        raise BlownUpStateError("rhs requested on a blown-up state")
    op = _Operator.get(state.grid, opts)
    r, _, _ = op.evaluate(state.m.values, state.theta)
    return GridFunction(state.grid, r)


def cfl_dt(m0: GridFunction, opts: SpectralOptions = SpectralOptions()) -> float:
    """A step that satisfies the guard for all time: ``|J| <= (coth(L) ||m||_1)^2``.

    ``|J| <= |v+||v-|`` and ``|v+-| <= coth(L) ||m||_1``, with ``||m||_1`` conserved.  Once a
    solution stops being resolved the discrete ``J`` can overshoot the bound by a few percent,
    hence the factor 0.9.
    """
    l1 = float(np.sum(np.abs(m0.values)) * m0.grid.dx)
    bound = (l1 / math.tanh(m0.grid.L)) ** 2
    if bound == 0.0:
        return math.inf
    return 0.9 * opts.cfl * m0.grid.dx / bound


def _rk4(op: _Operator, m: np.ndarray, theta: float, dt: float, k1=None):
    if k1 is None:
        k1 = op.evaluate(m, theta)[0]
    k2 = op.evaluate(m + 0.5 * dt * k1, theta)[0]
    k3 = op.evaluate(m + 0.5 * dt * k2, theta)[0]
    k4 = op.evaluate(m + dt * k3, theta)[0]
    new = m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if op.filt is not None:
        new = sfft.ifft(op.filt * sfft.fft(new))
    return new


def step(state: MomentumState, dt: float, opts: SpectralOptions = SpectralOptions(),
         check_cfl: bool = True) -> MomentumState:
    """One RK4 step.  Raises :class:`CFLViolation` when ``dt`` is too large (``dt < 0`` allowed
    only with ``check_cfl=False``, used for backward probing)."""
    if state.blown_up:
        raise BlownUpStateError("cannot step a blown-up state")
    op = _Operator.get(state.grid, opts)
    k1, max_J, _ = op.evaluate(state.m.values, state.theta)
    if check_cfl:
        if not dt > 0:
            raise InvalidParameterError(f"dt must be positive, got {dt}")
        lim = op.cfl_limit(max_J)
        if dt > lim:
            raise CFLViolation(dt, lim)
    new = _rk4(op, state.m.values, state.theta, dt, k1)
    out = replace(state, t=state.t + dt, m=GridFunction(state.grid, new))
    if out.m.blown_up:
        out = out.flagged("non-finite")
    return out


@dataclass
class RunResult:
    final: MomentumState
    snapshots: list = field(default_factory=list)
    series: list = field(default_factory=list)


def _step_count(t0, t_end, dt):
    span = t_end - t0
    return max(1, int(math.ceil(span / dt - 1e-9)))


def run(state0: MomentumState, dt: float, t_end: float, snapshot_every: int = 0,
        opts: SpectralOptions = SpectralOptions(),
        thresholds: BlowupThresholds = BlowupThresholds(),
        diagnostics: bool = True, m_ref: GridFunction | None = None) -> RunResult:
    """Step from ``state0.t`` to ``t_end`` with a uniform step no larger than ``dt``.

    Snapshots (and diagnostics rows) are taken at the start, every ``snapshot_every``
    steps, and at the end.  The run stops early at the first blow-up declaration and
    returns the flagged state.  A ``dt`` that violates the guard at the start is refused;
    a later violation is reported as reason ``"cfl"``.  ``m_ref`` is the datum whose ``L^1`` norm bounds the
    diagnostics (defaults to the initial state).
    """
    from .diagnostics import record_from_state

    if t_end < state0.t:
        raise InvalidParameterError("t_end must not precede the initial time")
    m_ref = state0.m if m_ref is None else m_ref
    res = RunResult(final=state0)

    def snap(s):
        res.snapshots.append(s)
        if diagnostics:
            res.series.append(record_from_state(s, m_ref, q_form=opts.q_form))

    snap(state0)
    if t_end == state0.t or state0.blown_up:
        return res

    op = _Operator.get(state0.grid, opts)
    nsteps = _step_count(state0.t, t_end, dt)
    h = (t_end - state0.t) / nsteps
    linf0 = float(np.max(np.abs(state0.m.values)))
    mon_thr = thresholds.grid_monitor(float(np.sum(np.abs(m_ref.values)) * m_ref.grid.dx),
                                      state0.grid.dx)
    state = state0
    for i in range(nsteps):
        k1, max_J, min_Jx = op.evaluate(state.m.values, state.theta)
        reason = None
        if not np.all(np.isfinite(k1)):
            reason = "non-finite"
        elif min_Jx < -mon_thr:
            reason = "monitor"
        if reason:
            state = state.flagged(reason)
            break
        if h > op.cfl_limit(max_J):
            if i == 0:
                raise CFLViolation(h, op.cfl_limit(max_J))
            # the step met the guard initially; |J| outgrowing it means resolution is lost
            state = state.flagged("cfl")
            break
        new = _rk4(op, state.m.values, state.theta, h, k1)
        t_new = state0.t + (i + 1) * h
        state = replace(state, t=t_new, m=GridFunction(state.grid, new))
        if state.m.blown_up:
            state = state.flagged("non-finite")
            break
        if np.max(np.abs(new)) > thresholds.linf_factor * linf0:
            state = state.flagged("linf")
            break
        if snapshot_every and (i + 1) % snapshot_every == 0 and i + 1 < nsteps:
            snap(state)
    if state.blown_up:
        res.snapshots.append(state)
        if diagnostics and not state.m.blown_up:
            res.series.append(record_from_state(state, m_ref, q_form=opts.q_form))
    else:
        snap(state)
    res.final = state
    return res
