"""Dilation flow of the unit interval on H^(k), its generator and the cutting map.

The flow fixing ``x = -1`` and ``x = 1`` acts by

    (U_s f)(x) = (sinh(pi s) x + cosh(pi s))^(2(k-1)) f(m_s(x)),
    m_s(x) = (cosh(pi s) x + sinh(pi s)) / (sinh(pi s) x + cosh(pi s)),

and its generator is ``2 pi (k-1) x f + pi (1 - x^2) f'``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CutNotAdmissible, PoleError
from .funcspace import B, IntervalRegion, TestFunction
from .funcspace import expr as E

INF = math.inf


def mobius_point(s, x):
    """``(cosh(s/2) x + sinh(s/2)) / (sinh(s/2) x + cosh(s/2))``; fixes -1 and 1.

    The flow at parameter ``s`` moves points by ``mobius_point(2 pi s, .)``.
    """
    c, d = math.sinh(0.5 * s), math.cosh(0.5 * s)
    x = np.asarray(x, dtype=float)
    den = c * x + d
    if np.any(np.abs(den) <= 1e-14 * (np.abs(c * x) + d)):
        raise PoleError(f"Moebius map with parameter {s} has its pole at x = {-d / c}")
    out = (d * x + c) / den
    return float(out) if out.ndim == 0 else out


def _point_jet(c: float, d: float, x: np.ndarray, n: int) -> np.ndarray:
    """Jet of ``(d x + c)/(c x + d)`` (determinant 1)."""
    den = c * x + d
    out = np.zeros((n + 1,) + x.shape)
    out[0] = (d * x + c) / den
    for j in range(1, n + 1):
        out[j] = (-1.0) ** (j - 1) * math.factorial(j) * c ** (j - 1) / den ** (j + 1)
    return out


class FlowNode(E.Expr):
    """Expression node for ``U_s f`` on H^(k)."""

    def __init__(self, f: E.Expr, k: int, s: float):
        self.f, self.k, self.s = f, int(k), float(s)
        self.c, self.d = math.sinh(math.pi * s), math.cosh(math.pi * s)
        lo, hi = f.support
        self.local = -1.0 <= lo and hi <= 1.0
        if self.local and lo < hi:
            inv = (lambda y: (self.d * y - self.c) / (-self.c * y + self.d))
            self.support = (inv(lo), inv(hi))
        elif self.local:
            self.support = (0.0, 0.0)

    def breakpoints(self):
        if not self.local:
            return ()
        inv = (lambda y: (self.d * y - self.c) / (-self.c * y + self.d))
        return tuple(inv(p) for p in self.f.breakpoints() if -1.0 <= p <= 1.0)

    def _jet(self, x, n):
        flat = x.ravel()
        out = np.zeros((n + 1, flat.size))
        den = self.c * flat + self.d
        if self.local:
            live = np.abs(flat) < 1.0
        else:
            pole = np.abs(den) <= 1e-14 * (np.abs(self.c * flat) + self.d)
            if np.any(pole):
                raise PoleError(f"flow at s={self.s} evaluated at its pole x = {-self.d / self.c}")
            live = np.ones(flat.size, dtype=bool)
        if np.any(live):
            xs = flat[live]
            inner = _point_jet(self.c, self.d, xs, n)
            outer = self.f.jet(inner[0], n)
            comp = E.compose_jets(outer, inner)
            pref = E.Pow(E.Poly([self.d, self.c]), 2 * (self.k - 1)).jet(xs, n)
            out[:, live] = E.leibniz(pref, comp)
        return out.reshape((n + 1,) + x.shape)

    def key(self):
        return f"flow[k={self.k}, s={self.s!r}]({self.f.key()})"


@dataclass(frozen=True)
class DilationFlow:
    """The one-parameter group ``s -> U_s`` on H^(k)."""

    k: int
    s: float

    def apply(self, f: TestFunction) -> TestFunction:
        return flow_apply(f, self.k, self.s)

    def compose(self, other: "DilationFlow") -> "DilationFlow":
        if other.k != self.k:
            raise ValueError("flows on different spaces")
        return DilationFlow(self.k, self.s + other.s)


def flow_apply(f: TestFunction, k: int, s: float) -> TestFunction:
    """``U_s f``; raises :class:`PoleError` when evaluated at the pole of the point map."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if s == 0.0:
        return f
    return TestFunction(FlowNode(f.expr, k, s))


def modular_generator(f: TestFunction, k: int) -> TestFunction:
    """``2 pi (k-1) x f + pi (1 - x^2) f'``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    drift = TestFunction(E.Poly([math.pi, 0.0, -math.pi])) * f.derivative(1)
    if k == 1:
        return drift
    return TestFunction(E.Poly([0.0, 2.0 * math.pi * (k - 1)])) * f + drift


def identity_IdD_check(f: TestFunction, k: int, xs=None) -> float:
    """Max grid residual of ``(2(k-1) x f + (1-x^2) f')^(k-1) = k(k-1) f^(k-2) + (1-x^2) f^(k)``."""
    if k < 2:
        raise ValueError("the identity needs k >= 2")
    if xs is None:
        xs = np.linspace(-2.0, 2.0, 401)
    xs = np.asarray(xs, dtype=float)
    lhs = (modular_generator(f, k) / math.pi).jet(xs, k - 1)[k - 1]
    jet = f.jet(xs, k)
    rhs = k * (k - 1) * jet[k - 2] + (1.0 - xs ** 2) * jet[k]
    return float(np.max(np.abs(lhs - rhs)))


def cutting_apply(g: TestFunction, k: int, interval: IntervalRegion = B,
                  tol: float = 1e-8) -> TestFunction:
    """``chi_I g``, admissible when ``g^(n)`` vanishes at both endpoints for ``n <= k-1``.

    Derivatives of order ``>= k`` at the endpoints are one-sided; the endpoints
    are registered as quadrature breakpoints.
    """
    ends = np.array([interval.a, interval.b])
    jet = g.jet(ends, k - 1)
    bad = np.abs(jet) > tol
    if np.any(bad):
        n, side = np.argwhere(bad)[0]
        raise CutNotAdmissible(
            f"derivative of order {n} is {jet[n, side]:.3e} at x = {ends[side]:g}; "
            f"orders 0..{k - 1} must vanish at both endpoints"
        )
    return TestFunction(E.Cut(g.expr, interval.a, interval.b, k))


def flow_derivative_order(f: TestFunction, k: int, h: float = 0.002, points: int = 200,
                          interval: IntervalRegion = B) -> dict:
    """Observed convergence order of the central difference of ``s -> U_s f`` at 0.

    Errors against :func:`modular_generator` are taken in the max norm over
    ``points`` interior grid points at steps ``h, h/2, h/4``.
    """
    xs = np.linspace(interval.a, interval.b, points + 2)[1:-1]
    exact = modular_generator(f, k)(xs)
    steps = [h, h / 2, h / 4]
    errors = []
    for step in steps:
        fd = (flow_apply(f, k, step)(xs) - flow_apply(f, k, -step)(xs)) / (2.0 * step)
        errors.append(float(np.max(np.abs(fd - exact))))
    orders = [math.log2(errors[i] / errors[i + 1]) if errors[i + 1] > 0 else INF
              for i in range(len(errors) - 1)]
    return {"steps": steps, "errors": errors, "orders": orders, "order": min(orders)}
