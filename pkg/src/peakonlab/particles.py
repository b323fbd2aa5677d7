"""Method-of-characteristics integrator.

Each initial grid node ``x_j`` carries a particle at ``h_j(t)`` with complex weight
``w_j * exp(i(arg m0_j + psi_j))`` where ``w_j = |m0(x_j)| dx`` never changes.  Positions
follow ``dh/dt = Re(e^{i theta} Q)`` and phases follow ``dpsi/dt = Im(e^{i theta} Q)``;
the ``J_x`` part of the growth rate along a characteristic cancels against the Jacobian
``h_x``, so the weight moduli (and hence the ``L^1`` norm) are exactly constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fields import check_q_form, check_theta
from .grid import BlownUpStateError, Grid, GridFunction, InvalidParameterError
from .helmholtz import kernel_sums
from .thresholds import BlowupThresholds


@dataclass(frozen=True, eq=False)
class ParticleEnsemble:
    t: float
    positions: np.ndarray
    phases: np.ndarray
    weight_moduli: np.ndarray
    unit_phase0: np.ndarray
    theta: float
    grid: Grid
    active: np.ndarray
    blown_up: bool = False
    blowup_time: float | None = None
    blowup_reason: str | None = None
    q_form: str = "corrected"

    @property
    def initial_phases(self) -> np.ndarray:
        return np.angle(self.unit_phase0)

    @property
    def L(self) -> float:
        return self.grid.L

    @property
    def dx(self) -> float:
        return self.grid.dx

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weight_moduli))

    def complex_weights(self, phases=None) -> np.ndarray:
        psi = self.phases if phases is None else phases
        return self.weight_moduli * self.unit_phase0 * np.exp(1j * psi)

    def flagged(self, reason: str, when: float | None = None) -> "ParticleEnsemble":
        return replace(self, blown_up=True, blowup_time=self.t if when is None else when,
                       blowup_reason=reason)


def init_particles(m0: GridFunction, theta: float, drop: float = 1e-14,
                   q_form: str = "corrected") -> ParticleEnsemble:
    """One particle per grid node; particles lighter than ``drop * max`` are skipped as sources."""
    m0.require_finite()
    theta = check_theta(theta)
    check_q_form(q_form)
    grid = m0.grid
    mod = np.abs(m0.values)
    w = mod * grid.dx
    unit = np.where(mod > 0, np.exp(1j * np.angle(m0.values)), 1.0 + 0.0j)
    top = float(np.max(w)) if w.size else 0.0
    active = w > drop * top if top > 0 else np.zeros(w.shape, bool)
    return ParticleEnsemble(
        t=0.0,
        positions=np.array(grid.x, dtype=float),
        phases=np.zeros(grid.point_count),
        weight_moduli=w,
        unit_phase0=unit,
        theta=theta,
        grid=grid,
        active=active,
        q_form=q_form,
    )


def _flow(ens: ParticleEnsemble, pos: np.ndarray, psi: np.ndarray):
    """``(u, u_x, Q)`` at every particle position."""
    act = ens.active
    if not np.any(act):
        z = np.zeros(pos.shape, dtype=complex)
        return z, z.copy(), z.copy()
    wt = ens.weight_moduli[act] * ens.unit_phase0[act] * np.exp(1j * psi[act])
    u, ux = kernel_sums(pos[act], wt, pos, ens.L)
    if ens.q_form == "corrected":
        Q = (u - ux) * np.conj(u + ux)
    else:
        Q = (u + ux) * np.conj(u - ux)
    return u, ux, Q


def _rates(ens, pos, psi):
    _, _, Q = _flow(ens, pos, psi)
    eQ = np.exp(1j * ens.theta) * Q
    return eQ.real, eQ.imag


def particle_rhs(ens: ParticleEnsemble):
    """``(dh/dt, dpsi/dt)`` for every particle."""
    if ens.blown_up and not np.all(np.isfinite(ens.positions)):
        raise BlownUpStateError("non-finite particle state")
    return _rates(ens, ens.positions, ens.phases)


def _rk4(ens, dt):
    h0, p0 = ens.positions, ens.phases
    a1, b1 = _rates(ens, h0, p0)
    a2, b2 = _rates(ens, h0 + 0.5 * dt * a1, p0 + 0.5 * dt * b1)
    a3, b3 = _rates(ens, h0 + 0.5 * dt * a2, p0 + 0.5 * dt * b2)
    a4, b4 = _rates(ens, h0 + dt * a3, p0 + dt * b3)
    h = h0 + dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
    p = p0 + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
    return h, p


def label_gaps(ens: ParticleEnsemble, positions=None) -> np.ndarray:
    """Cyclic gaps ``(h_{j+1} - h_j) mod 2L`` in label order."""
    h = ens.positions if positions is None else positions
    period = 2.0 * ens.L
    return np.mod(np.diff(np.append(h, h[0])), period)


def is_ordered(ens: ParticleEnsemble, positions=None) -> bool:
    """Labels still increase around the circle (winding number one)."""
    g = label_gaps(ens, positions)
    return bool(np.all(np.isfinite(g)) and round(float(np.sum(g)) / (2.0 * ens.L)) == 1)


def min_spacing_ratio(ens: ParticleEnsemble) -> float:
    """Smallest particle gap divided by ``dx`` (sorted order once labels have crossed)."""
    if is_ordered(ens):
        g = label_gaps(ens)
    else:
        s = np.sort(ens.positions)
        g = np.diff(np.append(s, s[0] + 2.0 * ens.L))
    return float(np.min(g) / ens.dx)


def _status(ens, h, p, thresholds):
    if not (np.all(np.isfinite(h)) and np.all(np.isfinite(p))):
        return "non-finite"
    if not is_ordered(ens, h):
        return "order"
    if np.min(label_gaps(ens, h)) < thresholds.spacing_ratio * ens.dx:
        return "spacing"
    return None


def step_particles(ens: ParticleEnsemble, dt: float,
                   thresholds: BlowupThresholds = BlowupThresholds()) -> ParticleEnsemble:
    """One RK4 step on ``(h, psi)``; order violation, gap collapse or non-finite values flag blow-up."""
    if not dt > 0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    if ens.blown_up and not np.all(np.isfinite(ens.positions)):
        raise BlownUpStateError("cannot step a non-finite ensemble")
    h, p = _rk4(ens, dt)
    status = _status(ens, h, p, thresholds) if not ens.blown_up else None
    period = 2.0 * ens.L
    h = np.mod(h + ens.L, period) - ens.L
    new = replace(ens, t=ens.t + dt, positions=h, phases=p)
    if status:
        new = new.flagged(status)
    return new


def cfl_dt(ens: ParticleEnsemble, cfl: float = 0.5) -> float:
    """Step satisfying ``dt <= cfl dx / max|J|`` for all time via ``|J| <= (coth(L) ||m||_1)^2``."""
    bound = (ens.total_weight / math.tanh(ens.L)) ** 2
    return math.inf if bound == 0 else cfl * ens.dx / bound


def max_speed(ens: ParticleEnsemble) -> float:
    dh, _ = particle_rhs(ens)
    return float(np.max(np.abs(dh)))


def reconstruct_m(ens: ParticleEnsemble, target: Grid | None = None, width: float | None = None,
                  cutoff: float = 8.0) -> GridFunction:
    """Deposit each complex weight with a unit-mass periodic Gaussian and divide by ``dx``.

    ``width`` defaults to twice the target spacing.  Each particle's discrete kernel is
    normalised to sum to one, so the deposited total equals the weight exactly.
    """
    target = ens.grid if target is None else target
    sigma = 2.0 * target.dx if width is None else float(width)
    n = target.point_count
    out = np.zeros(n, dtype=complex)
    act = ens.active
    if not np.any(act):
        return GridFunction(target, out)
    h = ens.positions[act]
    wt = ens.complex_weights()[act]
    R = int(math.ceil(cutoff * sigma / target.dx)) + 1
    offs = np.arange(-R, R + 1)
    base = np.floor((h + target.L) / target.dx).astype(int)
    idx = base[:, None] + offs[None, :]
    xi = -target.L + idx * target.dx
    ker = np.exp(-0.5 * ((xi - h[:, None]) / sigma) ** 2)
    ker /= ker.sum(axis=1, keepdims=True)
    contrib = ker * wt[:, None]
    idx = np.mod(idx, n).ravel()
    out = np.bincount(idx, weights=contrib.real.ravel(), minlength=n) \
        + 1j * np.bincount(idx, weights=contrib.imag.ravel(), minlength=n)
    return GridFunction(target, out / target.dx)


def velocity_on_grid(ens: ParticleEnsemble, target: Grid | None = None):
    """``(u, u_x)`` of the particle measure evaluated at the nodes of ``target``."""
    target = ens.grid if target is None else target
    act = ens.active
    wt = ens.complex_weights()[act]
    u, ux = kernel_sums(ens.positions[act], wt, target.x, ens.L)
    return GridFunction(target, u), GridFunction(target, ux)


@dataclass
class ParticleRunResult:
    final: ParticleEnsemble
    snapshots: list = field(default_factory=list)
    series: list = field(default_factory=list)


def run_particles(ens0: ParticleEnsemble, dt: float, t_end: float, snapshot_every: int = 0,
                  thresholds: BlowupThresholds = BlowupThresholds(),
                  stop_on_blowup: bool = True, refine: bool = True, max_halvings: int = 60,
                  diagnostics: bool = True, m_ref: GridFunction | None = None) -> ParticleRunResult:
    """Advance to ``t_end`` with uniform steps no larger than ``dt``.

    When a step ends in crossing or non-finite values and ``refine`` is set, the step is
    retried with halved sub-steps, so the run approaches the collapse until a gap falls
    below the spacing threshold; the declared time is that of the last accepted state.
    With ``stop_on_blowup=False`` the first flag is recorded and stepping continues.
    """
    from .diagnostics import record_from_particles

    if t_end < ens0.t:
        raise InvalidParameterError("t_end must not precede the initial time")
    res = ParticleRunResult(final=ens0)

    def snap(e):
        res.snapshots.append(e)
        if diagnostics:
            res.series.append(record_from_particles(e, m_ref))

    snap(ens0)
    if t_end == ens0.t:
        return res
    nsteps = max(1, int(math.ceil((t_end - ens0.t) / dt - 1e-9)))
    h = (t_end - ens0.t) / nsteps
    ens = ens0
    i = 0
    sub = h
    while i < nsteps:
        t_target = ens0.t + (i + 1) * h
        new = step_particles(ens, min(sub, t_target - ens.t), thresholds)
        if new.blown_up and not ens.blown_up:
            if stop_on_blowup:
                if new.blowup_reason == "spacing":
                    ens = new
                    break
                if refine and sub > h * 2.0 ** -max_halvings:
                    sub *= 0.5
                    continue
                ens = ens.flagged(new.blowup_reason)
                break
            # continue past the first flag, keeping its time
        ens = new
        if ens.t >= t_target - 1e-12 * h:
            ens = replace(ens, t=t_target)
            i += 1
            if snapshot_every and i % snapshot_every == 0 and i < nsteps:
                snap(ens)
    snap(ens)
    res.final = ens
    return res
