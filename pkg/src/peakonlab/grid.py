"""Periodic grid, complex grid functions, spectral differentiation and U(1)-invariant norms.

Transform convention
--------------------
Samples live at ``x_j = -L + j*dx`` for ``j = 0..N-1`` with ``dx = 2L/N``.  Fourier
coefficients are ``fhat = scipy.fft.fft(values)`` (unnormalised forward transform), stored
in the standard FFT order, and the wavenumber attached to slot ``n`` is ``k_n = pi*n/L``
with ``n`` running over ``0..N/2-1, -N/2..-1`` (``numpy.fft.fftfreq`` order).  The
Nyquist slot therefore carries the negative wavenumber ``-pi*N/(2L)``; every multiplier
in the package uses this single array.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft


class InvalidParameterError(ValueError):
    """A numerical parameter lies outside its admissible range."""


class BlownUpStateError(FloatingPointError):
    """An operation was requested on a state containing non-finite samples."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L, L)`` with ``N`` points (``N`` a power of two, ``N >= 8``)."""

    half_length: float
    point_count: int

    def __post_init__(self):
        n = self.point_count
        if not (isinstance(n, (int, np.integer)) and n >= 8 and (n & (n - 1)) == 0):
            raise InvalidParameterError(f"point_count must be a power of two >= 8, got {n!r}")
        if not (np.isfinite(self.half_length) and self.half_length > 0):
            raise InvalidParameterError(f"half_length must be positive, got {self.half_length!r}")
        object.__setattr__(self, "half_length", float(self.half_length))
        object.__setattr__(self, "point_count", int(n))

    @property
    def L(self) -> float:
        return self.half_length

    @property
    def N(self) -> int:
        return self.point_count

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.point_count

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.half_length + self.dx * np.arange(self.point_count)
        x.setflags(write=False)
        return x

    @cached_property
    def k(self) -> np.ndarray:
        k = np.pi / self.half_length * np.fft.fftfreq(self.point_count, d=1.0 / self.point_count)
        k.setflags(write=False)
        return k

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Integer mode numbers ``n`` in FFT order."""
        n = np.rint(np.fft.fftfreq(self.point_count, d=1.0 / self.point_count)).astype(int)
        n.setflags(write=False)
        return n

    def wrap(self, x):
        """Map positions into ``[-L, L)``."""
        L = self.half_length
        return np.mod(np.asarray(x, dtype=float) + L, 2.0 * L) - L

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.half_length, self.point_count * factor)

    def function(self, values, *, blown_up: bool = False) -> "GridFunction":
        return GridFunction(self, values, blown_up=blown_up)

    def sample(self, func) -> "GridFunction":
        """Evaluate a vectorised callable at the grid nodes."""
        return GridFunction(self, func(self.x))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples of a function on a :class:`Grid`; immutable after construction."""

    grid: Grid
    values: np.ndarray
    blown_up: bool = field(default=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex, copy=True)
        if v.shape != (self.grid.point_count,):
            raise InvalidParameterError(
                f"expected {self.grid.point_count} samples, got shape {v.shape}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if not self.blown_up and not np.all(np.isfinite(v)):
            object.__setattr__(self, "blown_up", True)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag(self) -> np.ndarray:
        return self.values.imag

    def hat(self) -> np.ndarray:
        return sfft.fft(self.values)

    def require_finite(self) -> "GridFunction":
        if self.blown_up:
            raise BlownUpStateError("grid function is flagged as blown up")
        return self

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def scaled(self, c: complex) -> "GridFunction":
        return GridFunction(self.grid, c * self.values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.grid, self.values - other.values)


@dataclass(frozen=True)
class ComplexPair:
    """Real and imaginary parts ``(f1, f2)`` of a grid function."""

    f1: np.ndarray
    f2: np.ndarray

    @classmethod
    def from_function(cls, f: GridFunction) -> "ComplexPair":
        return cls(f.values.real.copy(), f.values.imag.copy())

    def combine(self, grid: Grid) -> GridFunction:
        return GridFunction(grid, self.f1 + 1j * self.f2)


def _lp(absvals: np.ndarray, p: float, dx: float) -> float:
    if p < 1:
        raise InvalidParameterError(f"p must satisfy p >= 1 or p = inf, got {p}")
    if np.isinf(p):
        return float(np.max(absvals)) if absvals.size else 0.0
    if p == 1:
        return float(np.sum(absvals) * dx)
    if p == 2:
        return float(np.sqrt(np.sum(absvals * absvals) * dx))
    # scale by the max so large p does not overflow
    top = float(np.max(absvals)) if absvals.size else 0.0
    if top == 0.0:
        return 0.0
    return top * float(np.sum((absvals / top) ** p) * dx) ** (1.0 / p)


def lp_norm(f: GridFunction, p: float = 2.0) -> float:
    """Riemann-sum ``L^p`` norm of the complex modulus ``|f|`` (``p = inf`` gives the max)."""
    f.require_finite()
    return _lp(np.abs(f.values), p, f.grid.dx)


def spectral_derivative(f: GridFunction, order: int = 1) -> GridFunction:
    """Apply the Fourier multiplier ``(ik)^order``."""
    f.require_finite()
    return GridFunction(f.grid, sfft.ifft((1j * f.grid.k) ** order * f.hat()))


def spectral_energy(f: GridFunction) -> float:
    """``sum |fhat_n|^2 * dx / N``; equals ``lp_norm(f, 2)**2`` by Parseval."""
    fh = f.hat()
    return float(np.sum(np.abs(fh) ** 2) * f.grid.dx / f.grid.point_count)


def complex_pair_norm_sandwich(f1, f2, p: float, dx: float = 1.0):
    """Return ``(lower, mid, upper)`` for the real-pair norm equivalence and check the ordering.

    ``lower = (|f1|_p + |f2|_p)/2``, ``mid = |f1 + i f2|_p``, ``upper = |f1|_p + |f2|_p``.
    Raises ``AssertionError`` if ``lower <= mid <= upper`` fails beyond rounding.
    """
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    if f1.shape != f2.shape:
        raise InvalidParameterError(f"length mismatch: {f1.shape} vs {f2.shape}")
    n1 = _lp(np.abs(f1), p, dx)
    n2 = _lp(np.abs(f2), p, dx)
    mid = _lp(np.hypot(f1, f2), p, dx)
    lower, upper = 0.5 * (n1 + n2), n1 + n2
    slack = 1e-13 * max(upper, 1e-300)
    assert lower <= mid + slack and mid <= upper + slack, (lower, mid, upper)
    return lower, mid, upper


# --- padded products -------------------------------------------------------------------------

def padded_size(n: int, factor: float = 1.5) -> int:
    m = int(round(n * factor))
    return m + (m % 2)


def pad_spectrum(fh: np.ndarray, m: int) -> np.ndarray:
    """Embed an FFT-ordered length-N spectrum (band ``-N/2..N/2-1``) into length ``m``."""
    n = fh.shape[-1]
    out = np.zeros(fh.shape[:-1] + (m,), dtype=complex)
    h = n // 2
    out[..., :h] = fh[..., :h]
    out[..., m - h:] = fh[..., h:]
    return out


def truncate_spectrum(Fh: np.ndarray, n: int, keep_nyquist: bool = False) -> np.ndarray:
    """Inverse of :func:`pad_spectrum`; the Nyquist slot is zeroed unless ``keep_nyquist``."""
    m = Fh.shape[-1]
    h = n // 2
    out = np.empty(Fh.shape[:-1] + (n,), dtype=complex)
    out[..., :h] = Fh[..., :h]
    out[..., h:] = Fh[..., m - h:]
    if not keep_nyquist:
        out[..., h] = 0.0
    return out


def to_fine(fh: np.ndarray, m: int) -> np.ndarray:
    """Physical values on the ``m``-point grid of the band-limited function with spectrum ``fh``."""
    n = fh.shape[-1]
    return sfft.ifft(pad_spectrum(fh, m), axis=-1) * (m / n)


def from_fine(values: np.ndarray, n: int) -> np.ndarray:
    """Band-``n`` spectrum (FFT order, length ``n``) of fine-grid samples."""
    m = values.shape[-1]
    return truncate_spectrum(sfft.fft(values, axis=-1), n) * (n / m)
