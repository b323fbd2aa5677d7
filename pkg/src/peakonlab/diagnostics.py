"""Conserved quantities, pointwise bounds, blow-up monitor/predictor and transport residuals."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields as dc_fields

import numpy as np
import scipy.fft as sfft

from .fields import FieldBundle, assemble_fields, check_theta
from .grid import GridFunction, lp_norm, spectral_derivative

EPS = float(np.finfo(float).eps)

CSV_COLUMNS = ("t", "l1_m", "linf_m", "H1", "H2", "max_abs_u", "max_abs_ux", "inf_Jx",
               "min_spacing_ratio")


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    l1_m: float
    linf_m: float
    H1: float
    H2: float
    max_abs_u: float
    max_abs_ux: float
    inf_Jx: float
    min_spacing_ratio: float = math.nan
    besov_h_s: float | None = None

    def as_row(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in CSV_COLUMNS}

    def values(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in dc_fields(self)
                         if f.name != "besov_h_s"], dtype=float)


@dataclass(frozen=True)
class BlowupPrediction:
    triggered: bool
    x0: float | None
    Jx0: float | None
    m0_at_x0: float | None
    C0: float
    T_star: float | None
    # best ratio |J_x| / sqrt(2 C0 |m0|) - 1 over the grid (>= 0 iff the condition holds somewhere)
    margin: float


# --- integrands ----------------------------------------------------------------------------

def _hamiltonian_densities(u, ux, m, theta):
    s, c = math.sin(theta), math.cos(theta)
    a = s * (np.conj(u) * m).real + c * (np.conj(ux) * m).imag
    b = s * (np.conj(ux) * m).imag - c * (np.conj(u) * m).real
    h1 = a
    h2 = 0.25 * (np.abs(u) ** 2 - np.abs(ux) ** 2) * a + 0.5 * (np.conj(u) * ux).imag * b
    return h1, h2


def hamiltonians(m: GridFunction, theta: float):
    """``(H1, H2)`` by Riemann-sum quadrature with ``u, u_x`` from the Helmholtz inverse."""
    theta = check_theta(theta)
    b = assemble_fields(m, theta)
    return _hamiltonians_from_bundle(b)


def _hamiltonians_from_bundle(b: FieldBundle):
    h1, h2 = _hamiltonian_densities(b.u.values, b.u_x.values, b.m.values, b.theta)
    dx = b.m.grid.dx
    return float(np.sum(h1) * dx), float(np.sum(h2) * dx)


def h1_norm_squared(m: GridFunction) -> float:
    """``int |u|^2 + |u_x|^2``, equal to ``H1`` at ``theta = pi/2``."""
    b = assemble_fields(m, 0.0)
    return float(np.sum(np.abs(b.u.values) ** 2 + np.abs(b.u_x.values) ** 2) * m.grid.dx)


def blowup_monitor(bundle: FieldBundle) -> float:
    """``inf_x J_x`` on the grid."""
    return float(np.min(bundle.J_x.values.real))


def pointwise_bound_ratios(bundle: FieldBundle, l1_ref: float):
    """``(max|u|, max|u_x|) / (||m_ref||_1 / 2)``; both stay <= 1 on the line."""
    half = 0.5 * l1_ref
    if half == 0:
        return 0.0, 0.0
    return (float(np.max(np.abs(bundle.u.values))) / half,
            float(np.max(np.abs(bundle.u_x.values))) / half)


# --- blow-up prediction --------------------------------------------------------------------

def blowup_time(Jx0: float, C0: float, m_abs: float) -> float:
    """Smaller root of ``1 + Jx0 t + C0 |m| t^2 / 2`` (requires ``Jx0 <= -sqrt(2 C0 |m|)``).

    Written in the cancellation-free form ``2 / (|Jx0| + sqrt(Jx0^2 - 2 C0 |m|))``.
    """
    sq = Jx0 * Jx0
    disc = sq - 2.0 * C0 * m_abs
    if Jx0 >= 0 or disc < -8 * EPS * sq:
        raise ValueError("blow-up condition not satisfied")
    # a discriminant at the rounding level of Jx0^2 is a double root
    if disc <= 8 * EPS * sq:
        disc = 0.0
    return 2.0 / (abs(Jx0) + math.sqrt(disc))


def predict_blowup(m0: GridFunction, theta: float, floor: float = 1e-12,
                   q_form: str = "corrected") -> BlowupPrediction:
    """Scan the grid for points meeting ``J_x(x0) <= -sqrt(2 C0 |m0(x0)|)`` with ``C0 = 7||m0||_1^3``.

    Among qualifying points the one with the smallest predicted time is reported.
    """
    theta = check_theta(theta)
    m0.require_finite()
    l1 = lp_norm(m0, 1)
    C0 = 7.0 * l1 ** 3
    mod = np.abs(m0.values)
    if l1 == 0.0:
        return BlowupPrediction(False, None, None, None, 0.0, None, -1.0)
    b = assemble_fields(m0, theta, q_form=q_form)
    Jx = b.J_x.values.real
    ok = mod > floor * mod.max()
    need = np.sqrt(2.0 * C0 * mod)
    ratio = np.full(mod.shape, -np.inf)
    ratio[ok] = -Jx[ok] / need[ok]
    margin = float(np.max(ratio)) - 1.0
    hits = ok & (Jx <= -need) & (Jx < 0)
    if not np.any(hits):
        return BlowupPrediction(False, None, None, None, C0, None, margin)
    idx = np.flatnonzero(hits)
    times = np.array([blowup_time(Jx[i], C0, mod[i]) for i in idx])
    j = idx[int(np.argmin(times))]
    return BlowupPrediction(True, float(m0.grid.x[j]), float(Jx[j]), float(mod[j]), C0,
                            float(np.min(times)), margin)


# --- records -------------------------------------------------------------------------------

def record_from_state(state, m_ref: GridFunction | None = None, besov=None,
                      q_form: str = "corrected") -> DiagnosticsRecord:
    """Diagnostics row for a spectral :class:`~peakonlab.spectral.MomentumState`."""
    m = state.m
    b = assemble_fields(m, state.theta, q_form=q_form)
    H1, H2 = _hamiltonians_from_bundle(b)
    return DiagnosticsRecord(
        t=float(state.t),
        l1_m=lp_norm(m, 1),
        linf_m=lp_norm(m, np.inf),
        H1=H1,
        H2=H2,
        max_abs_u=float(np.max(np.abs(b.u.values))),
        max_abs_ux=float(np.max(np.abs(b.u_x.values))),
        inf_Jx=blowup_monitor(b),
        min_spacing_ratio=math.nan,
        besov_h_s=None if besov is None else float(besov(m)),
    )


def particle_monitor(ens, J=None) -> float:
    """Lagrangian ``inf J_x``: smallest ``(J_{j+1} - J_j) / (h_{j+1} - h_j)`` over adjacent labels."""
    from .particles import _flow, label_gaps

    if J is None:
        _, _, Q = _flow(ens, ens.positions, ens.phases)
        J = (np.exp(1j * ens.theta) * Q).real
    gaps = label_gaps(ens)
    dJ = np.diff(np.append(J, J[0]))
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(gaps > 0, dJ / gaps, -np.inf)
    return float(np.min(q))


def record_from_particles(ens, m_ref: GridFunction | None = None) -> DiagnosticsRecord:
    """Diagnostics row for a particle ensemble.

    ``l1_m`` is the weight sum; ``H1, H2`` are quadratures against the particle measure;
    ``max|u|``, ``max|u_x|`` are taken at the particle positions (they tile the domain).
    """
    from .particles import _flow, min_spacing_ratio, reconstruct_m

    u, ux, Q = _flow(ens, ens.positions, ens.phases)
    wt = ens.complex_weights()
    h1, h2 = _hamiltonian_densities(u, ux, wt, ens.theta)
    J = (np.exp(1j * ens.theta) * Q).real
    ordered = not ens.blown_up or ens.blowup_reason == "spacing"
    return DiagnosticsRecord(
        t=float(ens.t),
        l1_m=ens.total_weight,
        linf_m=float(np.max(np.abs(reconstruct_m(ens).values))),
        H1=float(np.sum(h1)),
        H2=float(np.sum(h2)),
        max_abs_u=float(np.max(np.abs(u))),
        max_abs_ux=float(np.max(np.abs(ux))),
        inf_Jx=particle_monitor(ens, J) if ordered else math.nan,
        min_spacing_ratio=min_spacing_ratio(ens),
    )


# --- transport residuals -------------------------------------------------------------------

def _inv_helmholtz(values: np.ndarray, k: np.ndarray, plus_minus: int = 0) -> np.ndarray:
    """``(1 - d^2)^{-1} (1 + s d) f`` with ``s`` in {-1, 0, +1}."""
    mult = (1.0 + plus_minus * 1j * k) / (1.0 + k * k)
    return sfft.ifft(mult * sfft.fft(values))


def vpm_sources(bundle: FieldBundle, source_form: str = "corrected"):
    """Right-hand sides ``(L+, L-)`` of the ``v+-`` transport equations.

    ``source_form="corrected"``: ``L+- = D^{-1}(1 +- d)(-J_x v+- + i Im(K) m)``, obtained by
    adding the ``u`` and ``u_x`` transport equations.  ``source_form="literal"``:
    ``D^{-1}(1 +- d)(-J_x u + i Im(K) m) -+ D^{-1}(J_x u_x)``, which omits
    ``-D^{-1}(J_x u_x)_x``.
    """
    k = bundle.m.grid.k
    Jx = bundle.J_x.values.real
    imK = bundle.K.values.imag
    m = bundle.m.values
    if source_form == "corrected":
        Lp = _inv_helmholtz(-Jx * bundle.v_plus.values + 1j * imK * m, k, +1)
        Lm = _inv_helmholtz(-Jx * bundle.v_minus.values + 1j * imK * m, k, -1)
    elif source_form == "literal":
        f = -Jx * bundle.u.values + 1j * imK * m
        g = _inv_helmholtz(Jx * bundle.u_x.values, k, 0)
        Lp = _inv_helmholtz(f, k, +1) - g
        Lm = _inv_helmholtz(f, k, -1) + g
    else:
        raise ValueError(f"unknown source_form {source_form!r}")
    return Lp, Lm


def _options(opts):
    from .spectral import SpectralOptions

    return SpectralOptions() if opts is None else opts


def _probe_states(state, dt_probe, opts):
    from .spectral import step

    fwd = step(state, dt_probe, opts, check_cfl=False)
    bwd = step(state, -dt_probe, opts, check_cfl=False)
    return fwd, bwd


def _check_state(state):
    if state.blown_up:
        from .grid import BlownUpStateError
        raise BlownUpStateError("residuals are defined only in the classical regime")


def vpm_transport_residual(state, dt_probe: float, opts=None, source_form: str = "corrected"):
    """Sup-norm mismatch ``(r+, r-)`` of ``v+-_t + J v+-_x = L+-``.

    ``v_t`` is a centred difference over ``+-dt_probe`` along the spectral solution.
    """
    _check_state(state)
    theta = state.theta
    opts = _options(opts)
    qf = opts.q_form
    fwd, bwd = _probe_states(state, dt_probe, opts)
    b0 = assemble_fields(state.m, theta, q_form=qf)
    bf = assemble_fields(fwd.m, theta, q_form=qf)
    bb = assemble_fields(bwd.m, theta, q_form=qf)
    Lp, Lm = vpm_sources(b0, source_form)
    J = b0.J.values.real
    out = []
    for name, L_ in (("v_plus", Lp), ("v_minus", Lm)):
        vt = (getattr(bf, name).values - getattr(bb, name).values) / (2.0 * dt_probe)
        vx = spectral_derivative(getattr(b0, name)).values
        out.append(float(np.max(np.abs(vt + J * vx - L_))))
    return tuple(out)


@dataclass(frozen=True)
class JxTransportTerms:
    lhs: np.ndarray
    rhs: np.ndarray
    bound: np.ndarray

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.lhs - self.rhs)))

    @property
    def lemma_margin(self) -> float:
        """``min_x (C0 |m| - lhs)``; nonnegative when the pointwise inequality holds."""
        return float(np.min(self.bound - self.lhs))


def jx_transport_terms(state, dt_probe: float, opts=None, m_ref: GridFunction | None = None,
                       source_form: str = "corrected") -> JxTransportTerms:
    _check_state(state)
    theta = state.theta
    rot = np.exp(1j * theta)
    opts = _options(opts)
    qf = opts.q_form
    fwd, bwd = _probe_states(state, dt_probe, opts)
    b0 = assemble_fields(state.m, theta, q_form=qf)
    Jxf = assemble_fields(fwd.m, theta, q_form=qf).J_x.values.real
    Jxb = assemble_fields(bwd.m, theta, q_form=qf).J_x.values.real
    J = b0.J.values.real
    Jx = b0.J_x.values.real
    Jxx = spectral_derivative(b0.J_x).values.real
    lhs = (Jxf - Jxb) / (2.0 * dt_probe) + J * Jxx + Jx * Jx
    vp, vm, m = b0.v_plus.values, b0.v_minus.values, b0.m.values
    I = (rot * b0.Q.values).imag
    Lp, Lm = vpm_sources(b0, source_form)
    if qf == "corrected":
        rhs = -I * (rot * (np.conj(vp) * m + vm * np.conj(m))).imag \
            + (rot * (m * np.conj(Lp) - np.conj(m) * Lm)).real
    else:
        rhs = I * (rot * (vp * np.conj(m) + np.conj(vm) * m)).imag \
            + (rot * (np.conj(m) * Lp - m * np.conj(Lm))).real
    l1 = lp_norm(state.m if m_ref is None else m_ref, 1)
    bound = 7.0 * l1 ** 3 * np.abs(m)
    return JxTransportTerms(lhs=lhs, rhs=rhs, bound=bound)


class LemmaViolation(AssertionError):
    pass


def jx_transport_residual(state, dt_probe: float, opts=None, m_ref=None,
                          source_form: str = "corrected", check_lemma: bool = True) -> float:
    """Sup-norm residual of the ``J_x`` transport identity.

    With ``check_lemma`` the pointwise bound ``lhs <= C0 |m|`` (``C0 = 7||m0||_1^3``) is
    enforced with slack of ten residuals; a violation raises :class:`LemmaViolation`.
    """
    terms = jx_transport_terms(state, dt_probe, opts, m_ref, source_form)
    r = terms.residual
    if check_lemma and terms.lemma_margin < -10.0 * r:
        raise LemmaViolation(f"J_x transport bound violated by {-terms.lemma_margin:.3e}")
    return r
