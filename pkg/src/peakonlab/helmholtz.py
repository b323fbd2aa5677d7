"""Inversion of ``1 - d^2/dx^2`` on the periodic domain.

Two routes are provided.  On a grid the inverse is the Fourier multiplier ``1/(1+k^2)``.
For particle data the inverse is a convolution with the periodic Green's function

    G(x) = cosh(L - |x|) / (2 sinh L),     G'(x) = -sgn(x) sinh(L - |x|) / (2 sinh L),

valid for ``|x| <= 2L`` and equal to the image sum of ``exp(-|x|)/2``.  ``G'(0)`` is taken
as 0 in particle sums (principal value of the jump).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import GridFunction, InvalidParameterError

# Largest position span handled in one exponentially scaled cumulative sum.
_SPAN = 300.0


@dataclass(frozen=True)
class HelmholtzKernel:
    half_length: float

    def _q(self) -> float:
        return np.exp(-2.0 * self.half_length)

    def G(self, x) -> np.ndarray:
        d = np.abs(self._wrap(x))
        L = self.half_length
        return (np.exp(-d) + np.exp(d - 2 * L)) / (2.0 * (1.0 - self._q()))

    def dG(self, x) -> np.ndarray:
        d = self._wrap(x)
        a = np.abs(d)
        L = self.half_length
        return -np.sign(d) * (np.exp(-a) - np.exp(a - 2 * L)) / (2.0 * (1.0 - self._q()))

    def _wrap(self, x):
        L = self.half_length
        return np.mod(np.asarray(x, dtype=float) + L, 2 * L) - L

    def fourier_coefficients(self, n_points: int) -> np.ndarray:
        """Continuous Fourier coefficients ``(1/2L) * int G e^{-ikx}`` estimated from samples."""
        dx = 2 * self.half_length / n_points
        x = -self.half_length + dx * np.arange(n_points)
        k = np.pi / self.half_length * np.fft.fftfreq(n_points, d=1.0 / n_points)
        # samples start at -L, so undo the phase of the shifted origin
        return sfft.fft(self.G(x)) * np.exp(-1j * k * self.half_length) / n_points


def _multiplier(m: GridFunction, mult: np.ndarray) -> GridFunction:
    m.require_finite()
    return GridFunction(m.grid, sfft.ifft(mult * m.hat()))


def u_from_m(m: GridFunction) -> GridFunction:
    """Solve ``u - u_xx = m`` on the grid's band."""
    k = m.grid.k
    return _multiplier(m, 1.0 / (1.0 + k * k))


def ux_from_m(m: GridFunction) -> GridFunction:
    k = m.grid.k
    return _multiplier(m, 1j * k / (1.0 + k * k))


def apply_helmholtz(u: GridFunction) -> GridFunction:
    """``(1 - d^2/dx^2) u`` spectrally."""
    k = u.grid.k
    return _multiplier(u, 1.0 + k * k)


# --- direct kernel sums --------------------------------------------------------------------

def _check(points, weights):
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=complex)
    if points.shape != weights.shape or points.ndim != 1:
        raise InvalidParameterError(
            f"points and weights must be 1-d arrays of equal length, got {points.shape}, {weights.shape}"
        )
    return points, weights


def _direct(points, weights, x, L, fn, chunk=2048):
    points, weights = _check(points, weights)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape, dtype=complex)
    if points.size == 0:
        return out
    kern = HelmholtzKernel(L)
    f = kern.G if fn == "u" else kern.dG
    for s in range(0, x.size, chunk):
        xs = x[s:s + chunk]
        out[s:s + chunk] = f(xs[:, None] - points[None, :]) @ weights
    return out


def kernel_sum_u(points, weights, x, L: float) -> np.ndarray:
    """``sum_j w_j G(x - h_j)`` by direct O(N_particles * N_eval) evaluation."""
    return _direct(points, weights, x, L, "u")


def kernel_sum_ux(points, weights, x, L: float) -> np.ndarray:
    """``sum_j w_j G'(x - h_j)`` with the self term ``G'(0) = 0``."""
    return _direct(points, weights, x, L, "ux")


# --- exact O((N+M) log N) evaluation -----------------------------------------------------------

def _decayed_prefix(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``S_k = sum_{j<=k} w_j exp(-(y_k - y_j))`` for sorted ``y``.

    Uses an exponentially rescaled cumulative sum inside blocks of span ``_SPAN`` and
    carries the running value between blocks.
    """
    n = y.size
    out = np.empty(n, dtype=complex)
    start = 0
    carry = 0.0 + 0.0j
    y_prev = y[0] if n else 0.0
    while start < n:
        stop = int(np.searchsorted(y, y[start] + _SPAN, side="right"))
        ys = y[start:stop] - y[start]
        acc = np.cumsum(w[start:stop] * np.exp(ys))
        blk = (acc * np.exp(-ys)).astype(complex)
        blk += carry * np.exp(-(y[start:stop] - y_prev))
        out[start:stop] = blk
        carry = blk[-1]
        y_prev = y[stop - 1]
        start = stop
    return out


def _left_sums(src: np.ndarray, w: np.ndarray, x: np.ndarray, L: float) -> np.ndarray:
    """Image sum ``sum_j w_j sum_{k>=0} exp(-((x - h_j) mod 2L + 2Lk))``, ties count as distance 0.

    ``src`` must be sorted and lie in an interval of length < 2L, and ``x < src[0] + 2L``.
    """
    period = 2.0 * L
    q = np.exp(-period)
    ext = np.concatenate([src - period, src])
    wext = np.concatenate([w, w])
    P_ext = _decayed_prefix(ext, wext)
    P_in = _decayed_prefix(src, w)

    def at(P, y, targets):
        idx = np.searchsorted(y, targets, side="right") - 1
        res = np.zeros(targets.shape, dtype=complex)
        ok = idx >= 0
        res[ok] = P[idx[ok]] * np.exp(-(targets[ok] - y[idx[ok]]))
        return res

    # bring targets into [src_min, src_min + 2L) so one previous image period suffices;
    # targets already there are left untouched so exact ties survive rounding
    lo = src[0]
    xt = np.where(x < lo, x + period, x)
    window = at(P_ext, ext, xt) - q * at(P_in, src, xt)
    return window / (1.0 - q)


def kernel_sums(points, weights, x, L: float):
    """Return ``(u, u_x)`` at ``x`` from particles, exactly equal to the direct sums.

    Sorting plus decayed prefix sums make this O((N+M) log N).  Targets coinciding with a
    particle take that particle's self term with ``G(0)`` for ``u`` and ``G'(0) = 0`` for ``u_x``.
    """
    points, weights = _check(points, weights)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if points.size == 0:
        z = np.zeros(x.shape, dtype=complex)
        return z, z.copy()
    period = 2.0 * L
    h = np.mod(points + L, period) - L
    h[h >= L] -= period
    order = np.argsort(h, kind="stable")
    hs, ws = h[order], weights[order]
    xw = np.mod(x + L, period) - L
    xw[xw >= L] -= period

    SL = _left_sums(hs, ws, xw, L)
    SR = _left_sums(-hs[::-1], ws[::-1], -xw, L)

    # weight sitting exactly at each target (counted on both sides above)
    lo = np.searchsorted(hs, xw, side="left")
    hi = np.searchsorted(hs, xw, side="right")
    cw = np.concatenate([[0.0], np.cumsum(ws)])
    same = np.where(hi > lo, cw[hi] - cw[lo], 0.0)

    u = 0.5 * (SL + SR) - 0.5 * same
    ux = 0.5 * (SR - SL)
    return u, ux
