"""The one-particle spaces H^(k): spectral norms, symplectic forms, complex structure.

The k-norm is ``||f||_k^2 = 2 int_0^inf p^(2k-1) |f^(p)|^2 dp`` with the unitary
Fourier transform ``f^(p) = (2 pi)^(-1/2) int f(x) exp(-i p x) dx``. It is
evaluated on an FFT grid; the trapezoid rule in ``p`` is exact up to the
Euler-Maclaurin endpoint terms at ``p = 0``, which are added back from the
Taylor coefficients of ``|f^|^2`` (obtained from the moments of ``f``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli

from .errors import GridResolutionError, SupportError
from .funcspace import (
    IntervalRegion,
    TestFunction,
    bump,
    effective_window,
    gaussian,
    integrate,
    moment,
)

DEFAULT_POINTS = 2 ** 16
MAX_POINTS = 2 ** 20
PAD_FACTOR = 8
TAIL_FRACTION = 1e-8
EM_TERMS = 8
NOISE_FLOOR = 50 * np.finfo(float).eps
_BERNOULLI = bernoulli(2 * (EM_TERMS + 12))


@dataclass(frozen=True)
class Grid:
    """Uniform periodic sample grid ``x_j = lo + j * dx``, ``j < n``."""

    lo: float
    length: float
    n: int

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return self.lo + self.dx * np.arange(self.n)

    @property
    def center(self) -> float:
        return self.lo + 0.5 * self.length

    @property
    def p(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)

    def refined(self) -> "Grid":
        return Grid(self.lo, self.length, 2 * self.n)


def _window_of(f) -> tuple | None:
    lo, hi = f.support
    if math.isfinite(lo) and math.isfinite(hi):
        return (lo, hi)
    return effective_window(f)


def grid_for(*fs, n: int = DEFAULT_POINTS) -> Grid | None:
    """Common grid whose central ``1/PAD_FACTOR`` covers every function's window.

    The grid is symmetric about the window's midpoint. ``None`` if some
    function does not decay.
    """
    wins = [_window_of(f) for f in fs]
    if any(w is None for w in wins):
        return None
    wins = [w for w in wins if w[1] > w[0]]
    if not wins:
        return Grid(-1.0, 2.0 * PAD_FACTOR, n)
    lo = min(w[0] for w in wins)
    hi = max(w[1] for w in wins)
    mid, width = 0.5 * (lo + hi), hi - lo
    length = PAD_FACTOR * width
    return Grid(mid - 0.5 * length, length, n)


class SpectralVector:
    """Fourier data of a real function on a :class:`Grid`, restricted to ``p >= 0``.

    ``spectrum`` holds ``f^(p_j)`` with the phase taken relative to the grid
    center (a common unimodular factor that drops out of every norm);
    ``taylor`` holds the Taylor coefficients of that spectrum at ``p = 0+``.
    Linear combinations and the complex structure act on both.
    """

    def __init__(self, grid: Grid, spectrum: np.ndarray, taylor: np.ndarray, scale: float):
        self.grid, self.spectrum, self.taylor = grid, spectrum, taylor
        self.scale = scale  # bound on sup |spectrum|, sets the rounding floor

    @classmethod
    def of(cls, f, grid: Grid) -> "SpectralVector":
        x = grid.x
        vals = np.asarray(f(x), dtype=float)
        phase = np.exp(-1j * grid.p * (grid.lo - grid.center))
        spectrum = np.fft.rfft(vals) * grid.dx / math.sqrt(2.0 * math.pi) * phase
        u = x - grid.center
        m = np.arange(2 * EM_TERMS)
        mu = np.array([np.sum(vals * u ** j) * grid.dx for j in m])
        fact = np.array([math.factorial(j) for j in m], dtype=float)
        taylor = mu * (-1j) ** m / fact / math.sqrt(2.0 * math.pi)
        scale = float(np.sum(np.abs(vals))) * grid.dx / math.sqrt(2.0 * math.pi)
        return cls(grid, spectrum, taylor, scale)

    def _check(self, other):
        if not isinstance(other, SpectralVector) or other.grid != self.grid:
            raise ValueError("spectral vectors live on different grids")

    def __add__(self, other):
        self._check(other)
        return SpectralVector(self.grid, self.spectrum + other.spectrum, self.taylor + other.taylor,
                              self.scale + other.scale)

    def __sub__(self, other):
        self._check(other)
        return SpectralVector(self.grid, self.spectrum - other.spectrum, self.taylor - other.taylor,
                              self.scale + other.scale)

    def __neg__(self):
        return SpectralVector(self.grid, -self.spectrum, -self.taylor, self.scale)

    def __mul__(self, c: float):
        return SpectralVector(self.grid, c * self.spectrum, c * self.taylor, abs(c) * self.scale)

    __rmul__ = __mul__

    def complex_structure(self) -> "SpectralVector":
        """Multiply the spectrum by ``i sign(p)`` (``i`` on ``p > 0``)."""
        spec = 1j * self.spectrum
        spec[0] = 0.0
        return SpectralVector(self.grid, spec, 1j * self.taylor, self.scale)

    def values(self) -> tuple:
        """``(x, values)`` of the real function with this spectrum on the grid."""
        g = self.grid
        phase = np.exp(1j * g.p * (g.lo - g.center))
        vals = np.fft.irfft(self.spectrum * phase, n=g.n) * math.sqrt(2.0 * math.pi) / g.dx
        return g.x, vals

    def norm_sq(self, k: int) -> float:
        """``2 int_0^inf p^(2k-1) |spectrum|^2 dp`` with the endpoint correction."""
        return _weighted_integral(self.grid, self.spectrum, self.taylor, self.scale, k)[0]


def resolved(spectrum: np.ndarray, scale: float) -> np.ndarray:
    """Zero the high-frequency band where the spectrum's upper envelope is below
    the FFT rounding floor; the weight ``p^(2k-1)`` would otherwise amplify noise."""
    amp = np.abs(spectrum)
    envelope = np.maximum.accumulate(amp[::-1])[::-1]
    return np.where(envelope > NOISE_FLOOR * scale, amp, 0.0)


def _weighted_integral(grid: Grid, spectrum, taylor, scale: float, k: int):
    p = grid.p
    h = p[1] - p[0]
    dens = p ** (2 * k - 1) * resolved(spectrum, scale) ** 2
    trap = h * (np.sum(dens) - 0.5 * dens[0] - 0.5 * dens[-1])
    # Taylor coefficients of |spectrum|^2 = A(p) conj(A(p))
    e = np.convolve(taylor, np.conj(taylor))[: taylor.size].real
    corr = 0.0
    for j in range(k, k + EM_TERMS):
        idx = 2 * j - 2 * k
        if idx >= e.size:
            break
        corr += float(_BERNOULLI[2 * j]) * h ** (2 * j) / (2 * j) * e[idx]
    total = 2.0 * (trap + corr)
    top = p >= 0.9 * p[-1]
    tail = 2.0 * h * float(np.sum(dens[top]))
    return total, tail


def norm_k(f: TestFunction, k: int, n: int = DEFAULT_POINTS) -> float:
    """``||f||_k^2`` by FFT; raises :class:`GridResolutionError` if unresolved."""
    if k < 1:
        raise ValueError("k must be >= 1")
    grid = grid_for(f, n=n)
    if grid is None:
        raise GridResolutionError(f"{f!r} does not decay; no finite FFT window for the {k}-norm")
    while True:
        sv = SpectralVector.of(f, grid)
        total, tail = _weighted_integral(grid, sv.spectrum, sv.taylor, sv.scale, k)
        if total <= 0.0 or tail <= TAIL_FRACTION * total:
            return max(total, 0.0)
        if grid.n >= MAX_POINTS:
            raise GridResolutionError(
                f"spectral tail fraction {tail / total:.2e} exceeds {TAIL_FRACTION:.0e} "
                f"at {grid.n} points"
            )
        grid = grid.refined()


def spectral_vectors(*fs, n: int = DEFAULT_POINTS) -> list:
    """:class:`SpectralVector` of each function on one common grid."""
    grid = grid_for(*fs, n=n)
    if grid is None:
        raise GridResolutionError("some function does not decay; no common FFT window")
    return [SpectralVector.of(f, grid) for f in fs]


def complex_structure(f: TestFunction, k: int = 1, n: int = DEFAULT_POINTS) -> SpectralVector:
    """``iota_k f``: spectrum multiplied by ``i sign(p)``; the same for every ``k``."""
    return spectral_vectors(f, n=n)[0].complex_structure()


class _Pair:
    def __init__(self, fn, support, bps):
        self.fn, self.support, self._bps = fn, support, bps

    def breakpoints(self):
        return self._bps

    def __call__(self, x):
        return self.fn(x)


def symplectic_k(f: TestFunction, g: TestFunction, k: int, tol: float = 1e-12) -> float:
    """``beta_k(f, g) = int f^(k-1) g^(k) dx`` by real-space quadrature."""
    if k < 1:
        raise ValueError("k must be >= 1")
    lo = max(f.support[0], g.support[0])
    hi = min(f.support[1], g.support[1])
    if lo >= hi:
        return 0.0

    def fn(x):
        return f.jet(x, k - 1)[k - 1] * g.jet(x, k)[k]

    integrand = _Pair(fn, (lo, hi), f.breakpoints() + g.breakpoints())
    if not (math.isfinite(lo) and math.isfinite(hi)):
        win = effective_window(integrand)
        if win is None:
            raise GridResolutionError("symplectic integrand does not decay")
        lo, hi = max(lo, win[0]), min(hi, win[1])
        if lo >= hi:
            return 0.0
    return integrate(integrand, (lo, hi), tol)


def inner_k(f: TestFunction, g: TestFunction, k: int) -> complex:
    """``(f, g)_k = <f, g>_k + i beta_k(f, g)``; the real part by polarization."""
    re = 0.25 * (norm_k(f + g, k) - norm_k(f - g, k))
    return complex(re, symplectic_k(f, g, k))


def _battery() -> tuple:
    out = []
    for c in (-1.5, -0.5, 0.0, 0.7, 1.9, 3.0):
        out.append(bump(0.8, c))
    for s, c in ((0.5, 0.0), (1.0, 0.3), (0.3, -1.0), (2.0, 1.0), (0.7, 2.2), (1.3, -2.5)):
        out.append(gaussian(s, c))
    return tuple(out)


BATTERY = _battery()


@dataclass(frozen=True, eq=False)
class KVector:
    """The class ``[rep]_k``: ``rep`` modulo polynomials of degree ``<= 2(k-1)``."""

    rep: TestFunction
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")

    def norm_sq(self) -> float:
        """``||rep||_k^2``. Non-decaying representatives go through ``D^(k-1)``."""
        if self.k > 1 and grid_for(self.rep) is None:
            return norm_k(self.rep.derivative(self.k - 1), 1)
        return norm_k(self.rep, self.k)

    def equals(self, other: "KVector", tol: float = 1e-8) -> bool:
        """Equality in H^(k), tested by the symplectic form against a fixed battery."""
        if self.k != other.k:
            return False
        diff = self.rep - other.rep
        return all(abs(symplectic_k(diff, g, self.k)) <= tol for g in BATTERY)

    def __eq__(self, other):
        if not isinstance(other, KVector):
            return NotImplemented
        return self.equals(other)

    __hash__ = None


def embed_Dk(v: KVector) -> KVector:
    """``D^(k-1) [f]_k = [f^(k-1)]_1``."""
    return KVector(v.rep.derivative(v.k - 1), 1) if v.k > 1 else v


def subnet_membership_defect(f: TestFunction, k: int, interval: IntervalRegion,
                             tol: float = 1e-12) -> np.ndarray:
    """Moments ``int_I x^n f``, ``n = 0..k-2``; all zero iff ``f`` lies in ``H_(k)(I)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    lo, hi = f.support
    if lo < hi and not interval.contains_interval(lo, hi):
        raise SupportError(
            f"support ({lo:g}, {hi:g}) is not contained in ({interval.a:g}, {interval.b:g})"
        )
    return np.array([moment(f, interval, n, tol) for n in range(k - 1)])
