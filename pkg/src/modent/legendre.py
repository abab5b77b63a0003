"""Legendre polynomials and the lower bound of the Legendre form.

``L = d/dx (1 - x^2) d/dx`` on ``(-1, 1)`` has eigenfunctions ``P_n`` with
``-L P_n = n(n+1) P_n``. For ``h`` orthogonal to ``P_0 .. P_{k-2}`` this gives

    int_B (1 - x^2) h'^2 >= k(k-1) int_B h^2,

with equality exactly for ``h`` proportional to ``P_{k-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import TailError
from .funcspace import B, TestFunction, integrate
from .funcspace import expr as E

QUAD_TOL = 1e-12


def legendre_jet(n: int, x, m: int = 0) -> np.ndarray:
    """``P_n`` and its first ``m`` derivatives at ``x`` by the three-term recurrence

    ``(j+1) P_{j+1}^(r) = (2j+1) (x P_j^(r) + r P_j^(r-1)) - j P_{j-1}^(r)``.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    prev = np.zeros((m + 1,) + x.shape)
    cur = np.zeros((m + 1,) + x.shape)
    cur[0] = 1.0
    for j in range(n):
        nxt = np.empty_like(cur)
        nxt[0] = ((2 * j + 1) * x * cur[0] - j * prev[0]) / (j + 1)
        for r in range(1, m + 1):
            nxt[r] = ((2 * j + 1) * (x * cur[r] + r * cur[r - 1]) - j * prev[r]) / (j + 1)
        prev, cur = cur, nxt
    return cur


def legendre_poly(n: int, x):
    """``P_n(x)``."""
    out = legendre_jet(n, x, 0)[0]
    return float(out) if out.ndim == 0 else out


class LegendreNode(E.Expr):
    """``P_n`` as an expression node."""

    def __init__(self, n: int):
        self.n = int(n)

    def _jet(self, x, n):
        return legendre_jet(self.n, x, n)

    def key(self):
        return f"P{self.n}(x)"


def legendre_function(n: int) -> TestFunction:
    return TestFunction(LegendreNode(n))


def rodrigues_coefficients(n: int) -> np.ndarray:
    """Ascending coefficients of ``(d/dx)^n (x^2 - 1)^n / (2^n n!)``."""
    base = np.polynomial.Polynomial([-1.0, 0.0, 1.0]) ** n
    return base.deriv(n).coef / (2.0 ** n * math.factorial(n)) if n else np.array([1.0])


class _Fn:
    def __init__(self, fn, bps=()):
        self.fn, self._bps = fn, tuple(bps)

    def breakpoints(self):
        return self._bps

    def __call__(self, x):
        return self.fn(x)


def _bps(f):
    return f.breakpoints() if hasattr(f, "breakpoints") else ()


def _jet(f, x, m):
    if hasattr(f, "jet"):
        return f.jet(x, m)[m]
    raise TypeError("f must provide derivative jets (a TestFunction)")


def legendre_form(f, order: int = 1) -> float:
    """``int_B (1 - x^2) f^(order)(x)^2 dx`` (``order = 1`` is ``-(f, L f)``)."""
    return integrate(_Fn(lambda x: (1.0 - x * x) * _jet(f, x, order) ** 2, _bps(f)), B, QUAD_TOL)


def eigen_check(n: int, points: int = 1001) -> float:
    """Max grid residual of ``d/dx((1 - x^2) P_n') + n(n+1) P_n`` on ``[-1, 1]``."""
    xs = np.linspace(-1.0, 1.0, points)
    p = legendre_jet(n, xs, 2)
    lhs = (1.0 - xs ** 2) * p[2] - 2.0 * xs * p[1]
    return float(np.max(np.abs(lhs + n * (n + 1) * p[0])))


class SpectralBound(NamedTuple):
    lhs: float
    rhs: float
    slack: float
    low_mode_defect: float


def spectral_bound_check(f, k: int) -> SpectralBound:
    """Both sides of ``int_B (1-x^2) f^(k)^2 >= k(k-1) int_B f^(k-1)^2``.

    The bound holds when ``f^(k-1)`` is orthogonal to ``P_0 .. P_{k-2}`` (which
    follows from ``f^(n)(+-1) = 0`` for ``n <= k-2``); ``low_mode_defect`` is the
    largest such overlap, so a negative slack can be told apart from a violated
    precondition.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    lhs = legendre_form(f, k)
    if k == 1:
        return SpectralBound(lhs, 0.0, lhs, 0.0)
    sq = integrate(_Fn(lambda x: _jet(f, x, k - 1) ** 2, _bps(f)), B, QUAD_TOL)
    rhs = k * (k - 1) * sq
    defect = 0.0
    for j in range(k - 1):
        ov = integrate(_Fn(lambda x, j=j: _jet(f, x, k - 1) * legendre_jet(j, x)[0], _bps(f)),
                       B, QUAD_TOL)
        defect = max(defect, abs(ov))
    return SpectralBound(lhs, rhs, lhs - rhs, defect)


@dataclass(frozen=True)
class LegendreExpansion:
    """``f ~ sum_n c_n P_n`` on ``B``."""

    coeffs: np.ndarray
    N: int
    tail_energy: float

    def __call__(self, x):
        return npleg.legval(np.asarray(x, dtype=float), self.coeffs)

    @property
    def norms(self) -> np.ndarray:
        n = np.arange(self.coeffs.size)
        return 2.0 / (2 * n + 1)

    def energy(self) -> float:
        """``sum c_n^2 2/(2n+1)``, the L2(B) norm squared of the truncation."""
        return float(np.sum(self.coeffs ** 2 * self.norms))

    def form(self) -> float:
        """``sum n(n+1) c_n^2 2/(2n+1)``: the Legendre form of the truncation."""
        n = np.arange(self.coeffs.size)
        return float(np.sum(n * (n + 1) * self.coeffs ** 2 * self.norms))


def _coefficients(f, N: int, nodes_count: int) -> np.ndarray:
    nodes, weights = npleg.leggauss(nodes_count)
    vals = np.asarray(f(nodes), dtype=float)
    n = np.arange(N + 1)
    return (legendre_jet_table(N, nodes) * weights) @ vals * (2 * n + 1) / 2.0


def expand(f, N: int = 64, threshold: float = 1e-10) -> LegendreExpansion:
    """Coefficients ``c_n = (2n+1)/2 int_B f P_n``, ``n <= N``, by Gauss-Legendre with
    ``N + 16`` nodes.

    The tail energy is the Parseval deficit ``||f||^2 - sum c_n^2 2/(2n+1)``
    (coefficients from a rule with twice the nodes) plus the energy change
    between the two rules, which exposes quadrature aliasing. It must not
    exceed ``threshold * max(1, ||f||^2)``, else :class:`TailError`.
    """
    n = np.arange(N + 1)
    norms = 2.0 / (2 * n + 1)
    coeffs = _coefficients(f, N, N + 16)
    fine = _coefficients(f, N, 2 * (N + 16))
    total = integrate(_Fn(lambda x: np.asarray(f(x), dtype=float) ** 2, _bps(f)), B, QUAD_TOL)
    coarse_energy = float(np.sum(coeffs ** 2 * norms))
    fine_energy = float(np.sum(fine ** 2 * norms))
    tail = max(total - fine_energy, 0.0) + abs(coarse_energy - fine_energy)
    if tail > threshold * max(1.0, total):
        raise TailError(f"Legendre tail energy {tail:.3e} above {threshold:.1e} with N = {N}")
    return LegendreExpansion(coeffs, N, tail)


def legendre_jet_table(N: int, x) -> np.ndarray:
    """Rows ``P_0(x) .. P_N(x)``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros((N + 1,) + x.shape)
    out[0] = 1.0
    if N >= 1:
        out[1] = x
    for j in range(1, N):
        out[j + 1] = ((2 * j + 1) * x * out[j] - j * out[j - 1]) / (j + 1)
    return out


def coefficient_bound(f, k: int, N: int = 64) -> tuple:
    """Coefficient-space oracle for :func:`spectral_bound_check`: expands ``f^(k-1)``
    and returns ``(sum n(n+1) c_n^2 2/(2n+1), k(k-1) sum c_n^2 2/(2n+1))``."""
    h = f.derivative(k - 1) if hasattr(f, "derivative") else f
    ex = expand(h, N)
    return ex.form(), k * (k - 1) * ex.energy()


def saturating_function(k: int) -> TestFunction:
    """``(x^2 - 1)^(k-1) / (2^(k-1) (k-1)!)``, whose ``(k-1)``-th derivative is ``P_{k-1}``."""
    c = 1.0 / (2.0 ** (k - 1) * math.factorial(k - 1))
    return TestFunction(E.Scale(c, E.Pow(E.Poly([-1.0, 0.0, 1.0]), k - 1)))
