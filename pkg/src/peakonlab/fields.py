"""Nonlinear flow fields built from ``(u, u_x, m)``.

With ``v+ = u + u_x`` and ``v- = u - u_x`` the default (``q_form="corrected"``) uses::

    Q   = v- conj(v+)               = |u|^2 - |u_x|^2 - 2i Im(conj(u) u_x)
    Q_x = conj(v+) m - v- conj(m)   (algebraic; no numerical differentiation)
    J   = Re(e^{i theta} Q)          advection speed
    J_x = Re(e^{i theta} Q_x)
    K   = i Im(e^{i theta} Q) - J_x  so that  m_t + J m_x = K m.

``q_form="literal"`` swaps the roles, ``Q = v+ conj(v-)`` and ``Q_x = v+ conj(m) - conj(v-) m``
(the complex conjugates).  Only the corrected form reduces to the Hirota-type equation at
``theta = 0`` and to the NLS-type equation at ``theta = pi/2``, and conserves both Hamiltonians;
the literal form is kept for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import (
    GridFunction,
    InvalidParameterError,
    from_fine,
    lp_norm,
    padded_size,
    spectral_derivative,
    to_fine,
)
from .helmholtz import u_from_m, ux_from_m


def check_theta(theta: float) -> float:
    theta = float(theta)
    if not (0.0 <= theta < np.pi):
        raise InvalidParameterError(f"theta must lie in [0, pi), got {theta}")
    return theta


Q_FORMS = ("corrected", "literal")


def check_q_form(q_form: str) -> str:
    if q_form not in Q_FORMS:
        raise InvalidParameterError(f"q_form must be one of {Q_FORMS}, got {q_form!r}")
    return q_form


def field_arrays(u, ux, m, theta, q_form="corrected"):
    """Pointwise field formulas on raw arrays; returns a dict of arrays."""
    rot = np.exp(1j * theta)
    vp = u + ux
    vm = u - ux
    if q_form == "corrected":
        Q = vm * np.conj(vp)
        Qx = np.conj(vp) * m - vm * np.conj(m)
    else:
        Q = vp * np.conj(vm)
        Qx = vp * np.conj(m) - np.conj(vm) * m
    eQ = rot * Q
    J = eQ.real
    Jx = (rot * Qx).real
    K = 1j * eQ.imag - Jx
    return dict(v_plus=vp, v_minus=vm, Q=Q, Q_x=Qx, J=J, J_x=Jx, K=K)


@dataclass(frozen=True)
class FieldBundle:
    theta: float
    q_form: str
    u: GridFunction
    u_x: GridFunction
    m: GridFunction
    v_plus: GridFunction
    v_minus: GridFunction
    Q: GridFunction
    Q_x: GridFunction
    J: GridFunction
    J_x: GridFunction
    K: GridFunction


def assemble_fields(m: GridFunction, theta: float, dealias: bool = False,
                    q_form: str = "corrected") -> FieldBundle:
    """Compute every flow field from the momentum ``m``.

    With ``dealias=True`` the products are formed on a 3/2-padded grid and truncated back
    to the band of ``m``; pointwise identities then hold only up to the discarded tail.
    """
    theta = check_theta(theta)
    check_q_form(q_form)
    m.require_finite()
    grid = m.grid
    u = u_from_m(m)
    ux = ux_from_m(m)
    if dealias:
        n = grid.point_count
        M = padded_size(n)
        fine = {key: to_fine(f.hat(), M) for key, f in (("u", u), ("ux", ux), ("m", m))}
        arrs = field_arrays(fine["u"], fine["ux"], fine["m"], theta, q_form)
        arrs = {key: sfft.ifft(from_fine(val, n)) for key, val in arrs.items()}
        arrs["J"] = arrs["J"].real
        arrs["J_x"] = arrs["J_x"].real
    else:
        arrs = field_arrays(u.values, ux.values, m.values, theta, q_form)
    g = {key: GridFunction(grid, val) for key, val in arrs.items()}
    return FieldBundle(theta=theta, q_form=q_form, u=u, u_x=ux, m=m, **g)


def qx_consistency_residual(bundle: FieldBundle) -> float:
    """``max |d/dx Q - Q_x|`` comparing spectral differentiation with the algebraic formula."""
    return lp_norm(spectral_derivative(bundle.Q) - bundle.Q_x, np.inf)


def conservative_form_residual(bundle: FieldBundle) -> float:
    """Mismatch between ``-(J m)_x + i Im(e^{i theta}Q) m`` and ``-J m_x + K m``."""
    Jm = bundle.m.with_values(bundle.J.values * bundle.m.values)
    cons = -spectral_derivative(Jm).values + 1j * (np.exp(1j * bundle.theta) * bundle.Q.values).imag * bundle.m.values
    trans = -bundle.J.values * spectral_derivative(bundle.m).values + bundle.K.values * bundle.m.values
    return float(np.max(np.abs(cons - trans)))
