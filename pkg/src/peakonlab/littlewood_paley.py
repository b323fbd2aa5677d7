"""Dyadic Littlewood-Paley blocks and Besov norms on the periodic grid.

The cutoff is ``chi(xi) = psi((4/3 - |xi|) / (4/3 - 3/4))`` with the smooth step
``psi(t) = f(t) / (f(t) + f(1 - t))``, ``f(t) = exp(-1/t)`` for ``t > 0``.  It equals 1 on
``|xi| <= 3/4`` and 0 on ``|xi| >= 4/3``.  The ring function is ``phi(xi) = chi(xi/2) - chi(xi)``,
supported in ``3/4 <= |xi| <= 8/3``, so ``chi + sum_q phi(2^-q .)`` telescopes to 1 exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import Grid, GridFunction, InvalidParameterError, _lp

INNER = 3.0 / 4.0
OUTER = 4.0 / 3.0


def _f(t):
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t) -> np.ndarray:
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.asarray(t, dtype=float)
    a = _f(t)
    b = _f(1.0 - t)
    return a / (a + b)


def chi(xi) -> np.ndarray:
    r = np.abs(np.asarray(xi, dtype=float))
    return smooth_step((OUTER - r) / (OUTER - INNER))


def phi(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return chi(xi / 2.0) - chi(xi)


@dataclass(frozen=True)
class DyadicPartition:
    grid: Grid

    @property
    def q_max(self) -> int:
        """Largest block index that can touch a grid frequency."""
        nyq = math.pi * self.grid.point_count / (2.0 * self.grid.L)
        return max(0, int(math.ceil(math.log2(nyq * OUTER))))

    def multiplier(self, q: int) -> np.ndarray:
        if q < -1:
            raise InvalidParameterError(f"block index must be >= -1, got {q}")
        k = self.grid.k
        if q == -1:
            return chi(k)
        return phi(k / 2.0 ** q)

    def cutoff_multiplier(self, q: int) -> np.ndarray:
        return chi(self.grid.k / 2.0 ** q)

    def blocks(self) -> range:
        return range(-1, self.q_max + 1)


@dataclass(frozen=True)
class BesovParams:
    s: float
    p: float = 2.0
    r: float = 2.0

    def __post_init__(self):
        if not (self.p >= 1 and self.r >= 1):
            raise InvalidParameterError(f"need p, r >= 1, got p={self.p}, r={self.r}")


def _apply(f: GridFunction, mult: np.ndarray) -> GridFunction:
    f.require_finite()
    return f.with_values(sfft.ifft(mult * f.hat()))


def dyadic_block(f: GridFunction, q: int) -> GridFunction:
    """``Delta_q f``: ``chi(D) f`` for ``q = -1``, ``phi(2^-q D) f`` for ``q >= 0``."""
    return _apply(f, DyadicPartition(f.grid).multiplier(q))


def low_freq_cutoff(f: GridFunction, q: int) -> GridFunction:
    """``S_q f = chi(2^-q D) f``."""
    if q < 0:
        raise InvalidParameterError(f"cutoff index must be >= 0, got {q}")
    return _apply(f, DyadicPartition(f.grid).cutoff_multiplier(q))


def block_norms(f: GridFunction, p: float = 2.0) -> dict[int, float]:
    """``{q: ||Delta_q f||_{L^p}}`` for every block that can be nonzero."""
    part = DyadicPartition(f.grid)
    fh = f.hat()
    dx = f.grid.dx
    return {q: _lp(np.abs(sfft.ifft(part.multiplier(q) * fh)), p, dx) for q in part.blocks()}


def block_energies(f: GridFunction) -> dict[int, float]:
    return {q: v * v for q, v in block_norms(f, 2.0).items()}


def besov_norm(f: GridFunction, params: BesovParams) -> float:
    """``|| 2^{qs} ||Delta_q f||_{L^p} ||_{l^r}`` over ``q >= -1``."""
    norms = block_norms(f, params.p)
    terms = np.array([2.0 ** (q * params.s) * v for q, v in norms.items()])
    if math.isinf(params.r):
        return float(terms.max())
    top = terms.max()
    if top == 0.0:
        return 0.0
    return float(top * np.sum((terms / top) ** params.r) ** (1.0 / params.r))


def sobolev_norm(f: GridFunction, s: float) -> float:
    """``(int (1+k^2)^s |f_hat|^2)^{1/2}`` with the Parseval normalisation of :func:`lp_norm`."""
    k = f.grid.k
    fh = f.hat()
    return float(math.sqrt(np.sum((1.0 + k * k) ** s * np.abs(fh) ** 2) * f.grid.dx / f.grid.point_count))
