"""Test functions, intervals and the real-calculus primitives built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as E
from .quadrature import DEFAULT_TOL, batched_panels, integrate

INF = math.inf


@dataclass(frozen=True)
class IntervalRegion:
    """Open interval ``(a, b)`` of the real line."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.a < self.b:
            raise ValueError(f"interval needs finite a < b, got ({self.a}, {self.b})")

    @classmethod
    def centered(cls, R: float) -> "IntervalRegion":
        """``B_R = (-R, R)``."""
        if not R > 0:
            raise ValueError("R must be positive")
        return cls(-float(R), float(R))

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def radius(self) -> float:
        return 0.5 * (self.b - self.a)

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains_interval(self, lo: float, hi: float, slack: float = 1e-12) -> bool:
        return lo >= self.a - slack and hi <= self.b + slack

    def as_tuple(self) -> tuple:
        return (self.a, self.b)


B = IntervalRegion(-1.0, 1.0)


def _wrap(e) -> "TestFunction":
    return TestFunction(e)


def _lift(other) -> E.Expr:
    if isinstance(other, TestFunction):
        return other.expr
    if isinstance(other, (int, float, np.floating, np.integer)):
        return E.Const(float(other))
    return NotImplemented


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Smooth real function on the line with exact derivatives of every order.

    Arithmetic (``+``, ``-``, ``*``, scalar ``/``, integer ``**``) builds new
    expressions; ``derivative`` returns another TestFunction.
    """

    __test__ = False  # not a pytest class

    expr: E.Expr

    @property
    def support(self) -> tuple:
        return self.expr.support

    @property
    def support_hint(self) -> IntervalRegion | None:
        lo, hi = self.expr.support
        if math.isfinite(lo) and math.isfinite(hi) and lo < hi:
            return IntervalRegion(lo, hi)
        return None

    def breakpoints(self) -> tuple:
        return self.expr.breakpoints()

    def jet(self, x, n: int) -> np.ndarray:
        """Values and derivatives up to order ``n``; shape ``(n + 1,) + x.shape``."""
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = self.expr.jet(flat, n)
        lo, hi = self.expr.support
        if lo > -INF or hi < INF:
            out = out * ((flat >= lo) & (flat <= hi))
        return out.reshape((n + 1,) + x.shape)

    def __call__(self, x):
        return self.jet(x, 0)[0]

    def derivative(self, m: int = 1) -> "TestFunction":
        if m == 0:
            return self
        return _wrap(E.Deriv(self.expr, m))

    def compose_affine(self, alpha: float, beta: float = 0.0) -> "TestFunction":
        """``x -> f(alpha * x + beta)``."""
        return _wrap(E.Affine(self.expr, alpha, beta))

    def __add__(self, other):
        o = _lift(other)
        return NotImplemented if o is NotImplemented else _wrap(E.Sum(self.expr, o))

    __radd__ = __add__

    def __neg__(self):
        return _wrap(E.Scale(-1.0, self.expr))

    def __sub__(self, other):
        o = _lift(other)
        return NotImplemented if o is NotImplemented else _wrap(E.Sum(self.expr, E.Scale(-1.0, o)))

    def __rsub__(self, other):
        o = _lift(other)
        return NotImplemented if o is NotImplemented else _wrap(E.Sum(o, E.Scale(-1.0, self.expr)))

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return _wrap(E.Scale(float(other), self.expr))
        o = _lift(other)
        return NotImplemented if o is NotImplemented else _wrap(E.Prod(self.expr, o))

    __rmul__ = __mul__

    def __truediv__(self, c):
        if not isinstance(c, (int, float, np.floating, np.integer)):
            return NotImplemented
        return _wrap(E.Scale(1.0 / float(c), self.expr))

    def __pow__(self, p: int):
        return _wrap(E.Pow(self.expr, p))

    def __repr__(self):
        return f"TestFunction({self.expr.key()})"


# --- constructors -----------------------------------------------------------

def const(c: float) -> TestFunction:
    return _wrap(E.Const(c))


def identity() -> TestFunction:
    return _wrap(E.Var())


def poly(coeffs) -> TestFunction:
    """Polynomial with ascending coefficients."""
    return _wrap(E.Poly(coeffs))


def exp(f: TestFunction) -> TestFunction:
    return _wrap(E.Exp(f.expr))


def bump(scale: float = 1.0, center: float = 0.0) -> TestFunction:
    """``exp(-1/(1-u^2))`` with ``u = (x - center)/scale``; support ``[center-scale, center+scale]``."""
    return _wrap(E.Affine(E.Bump(), 1.0 / scale, -center / scale))


def gaussian(scale: float = 1.0, center: float = 0.0) -> TestFunction:
    """``exp(-u^2/2)`` with ``u = (x - center)/scale``."""
    return _wrap(E.Affine(E.Gauss(), 1.0 / scale, -center / scale))


def step(alpha: float = 1.0, beta: float = 0.0) -> TestFunction:
    """Smooth step evaluated at ``alpha * x + beta`` (rises over ``[-1, 1]`` in that variable)."""
    return _wrap(E.Affine(E.Step(), alpha, beta))


def window(a: float, b: float, margin: float | None = None) -> TestFunction:
    """Smooth plateau: exactly 1 on ``[a, b]``, 0 outside ``[a - margin, b + margin]``.

    The default margin is half the interval length.
    """
    if not a < b:
        raise ValueError("window needs a < b")
    m = 0.5 * (b - a) if margin is None else float(margin)
    if not m > 0:
        raise ValueError("window margin must be positive")
    up = E.Affine(E.Step(), 2.0 / m, 1.0 - 2.0 * a / m)
    down = E.Affine(E.Step(), -2.0 / m, 1.0 + 2.0 * b / m)
    return _wrap(E.Prod(up, down))


# --- calculus primitives ----------------------------------------------------

def evaluate(f: TestFunction, x, order: int = 0):
    """``f^(order)(x)`` from the exact derivative jet."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    out = f.jet(x, order)[order]
    return float(out) if np.ndim(out) == 0 else out


def moment(f: TestFunction, interval, n: int, tol: float = DEFAULT_TOL) -> float:
    """``int_I x^n f(x) dx``."""
    if n < 0:
        raise ValueError("moment order must be nonnegative")
    integrand = _Integrand(lambda x: x ** n * f(x), f)
    return integrate(integrand, interval, tol)


def variance_on(f: TestFunction, interval, tol: float = DEFAULT_TOL) -> float:
    """Variance of ``f`` under the uniform probability measure ``dx/|I|`` on ``I``."""
    interval = _region(interval)
    mean = integrate(_Integrand(f, f, clip=False), interval, tol) / interval.length
    sq = integrate(_Integrand(lambda x: (f(x) - mean) ** 2, f, clip=False), interval, tol)
    return sq / interval.length


def _region(interval) -> IntervalRegion:
    if isinstance(interval, IntervalRegion):
        return interval
    a, b = interval
    return IntervalRegion(float(a), float(b))


class _Integrand:
    """Callable carrying a function's support/breakpoints to the quadrature."""

    def __init__(self, fn, like: TestFunction, clip: bool = True):
        self.fn = fn
        self.support = like.support if clip else (-INF, INF)
        self._bp = like.breakpoints()

    def breakpoints(self):
        return self._bp

    def __call__(self, x):
        return self.fn(x)


class AntiDerivative(E.Expr):
    """``g`` with ``g^(k-1) = f`` and ``g^(n)(anchor) = 0`` for ``n <= k - 2``.

    Orders ``>= k - 1`` delegate to ``f``'s exact jet. Lower orders use the
    repeated-integration formula ``g^(m)(x) = int_anchor^x (x-t)^p/p! f(t) dt``
    with ``p = k - 2 - m``, accumulated over sorted evaluation points so each
    quadrature only covers the gap between neighbours.
    """

    def __init__(self, f: E.Expr, k: int, anchor: float, tol: float = 1e-13):
        if k < 2:
            raise ValueError("AntiDerivative needs k >= 2")
        self.f, self.k, self.anchor, self.tol = f, int(k), float(anchor), tol
        lo, hi = f.support
        self.support = (lo, INF) if self.anchor <= lo else (-INF, INF)
        self._ftf = TestFunction(f)

    def breakpoints(self):
        return self.f.breakpoints()

    KNOT_SPACING = 0.125
    KNOT_REACH = 16.0

    def _knot_table(self):
        """Cached Cauchy states on a grid around the anchor, so no gap is long."""
        if getattr(self, "_knots", None) is None:
            lo, hi = self._ftf.support
            a = max(lo, self.anchor - self.KNOT_REACH)
            b = min(hi, self.anchor + self.KNOT_REACH)
            grid = np.arange(math.ceil(a / self.KNOT_SPACING), math.floor(b / self.KNOT_SPACING) + 1)
            grid = grid * self.KNOT_SPACING
            extra = [p for p in self.breakpoints() if a <= p <= b]
            knots = np.unique(np.concatenate([grid, extra, [a, b]]))
            knots = knots[np.isfinite(knots)]
            self._knots = (knots, self._cauchy_from(knots, None))
        return self._knots

    def _cauchy(self, x: np.ndarray) -> np.ndarray:
        return self._cauchy_from(x, self._knot_table())

    def _cauchy_from(self, x: np.ndarray, table) -> np.ndarray:
        pmax = self.k - 2
        out = np.zeros((pmax + 1, x.size))
        fact = np.array([math.factorial(p) for p in range(pmax + 1)], dtype=float)
        powers = np.arange(pmax + 1)[:, None]
        order = np.argsort(x, kind="stable")
        right = order[x[order] >= self.anchor]
        left = order[::-1][x[order[::-1]] < self.anchor]
        bps = np.array(sorted(self.breakpoints()), dtype=float)
        for sign, seq in ((1.0, right), (-1.0, left)):
            if seq.size == 0:
                continue
            ends = x[seq].astype(float)
            starts = np.concatenate([[self.anchor], ends[:-1]])
            restart = np.full(ends.size, -1)
            if table is not None and table[0].size:
                knots, states = table
                # nearest knot between the anchor and each point, on the anchor side
                if sign > 0:
                    idx = np.searchsorted(knots, ends, "right") - 1
                    ok = idx >= 0
                    ok[ok] &= knots[idx[ok]] >= self.anchor
                    better = ok.copy()
                    better[ok] = knots[idx[ok]] > starts[ok]
                else:
                    idx = np.searchsorted(knots, ends, "left")
                    ok = idx < knots.size
                    ok[ok] &= knots[idx[ok]] < self.anchor
                    better = ok.copy()
                    better[ok] = knots[idx[ok]] < starts[ok]
                restart[better] = idx[better]
                starts[better] = knots[idx[better]]
            lo, hi = np.minimum(starts, ends), np.maximum(starts, ends)
            # every gap in one batched panel; the rare failures go adaptive
            end_rep = np.tile(ends, 3)

            def batch(t):
                e = np.repeat(end_rep, t.size // end_rep.size)
                return (e - t) ** powers / fact[:, None] * self._ftf(t)

            parts, errs = batched_panels(batch, lo, hi)
            kinked = np.searchsorted(bps, lo, "right") < np.searchsorted(bps, hi, "left")
            redo = np.nonzero(((errs > self.tol) | kinked) & (hi > lo))[0]
            for j in redo:
                xi = ends[j]

                def seg(t, xi=xi):
                    return (xi - t) ** powers / fact[:, None] * self._ftf(t)

                parts[:, j] = integrate(_Integrand(seg, self._ftf), (lo[j], hi[j]), self.tol)
            parts *= np.sign(ends - starts)
            state = np.zeros(pmax + 1)
            for j, i in enumerate(seq):
                if restart[j] >= 0:
                    state = table[1][:, restart[j]]
                d = ends[j] - starts[j]
                if d != 0.0:
                    state = np.array([
                        sum(d ** (p - q) / fact[p - q] * state[q] for q in range(p + 1))
                        for p in range(pmax + 1)
                    ]) + parts[:, j]
                out[:, i] = state
        return out

    def _jet(self, x, n):
        flat = x.ravel()
        out = np.zeros((n + 1, flat.size))
        k = self.k
        if n >= k - 1:
            out[k - 1:] = self.f.jet(flat, n - (k - 1))
        low = min(n, k - 2)
        if low >= 0:
            cauchy = self._cauchy(flat)
            for m in range(low + 1):
                out[m] = cauchy[k - 2 - m]
        return out.reshape((n + 1,) + x.shape)

    def key(self):
        return f"antideriv[{self.k - 1}, {self.anchor!r}]({self.f.key()})"


def antiderivative_chain(f: TestFunction, k: int, anchor: float) -> TestFunction:
    """``g`` with ``g^(k-1) = f`` and ``g^(n)(anchor) = 0``, ``n = 0..k-2``; ``k = 1`` returns ``f``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return f
    return TestFunction(AntiDerivative(f.expr, k, anchor))


def effective_window(fn, start: float = 8.0, rel: float = 1e-17, max_doublings: int = 12):
    """Symmetric window ``[-L, L]`` beyond which ``|fn|`` is below ``rel * max|fn|``.

    For functions without a finite support hint. Returns ``None`` if the
    function does not decay.
    """
    half = start
    for _ in range(max_doublings):
        xs = np.linspace(-half, half, 8001)
        v = np.abs(np.asarray(fn(xs), dtype=float))
        if v.ndim > 1:
            v = v.max(axis=0)
        peak = v.max()
        if peak == 0.0:
            return (0.0, 0.0)
        edge = max(v[: 400].max(), v[-400:].max())
        if edge <= rel * peak:
            live = np.nonzero(v > rel * peak)[0]
            lo = xs[max(live[0] - 1, 0)]
            hi = xs[min(live[-1] + 1, xs.size - 1)]
            return (float(lo), float(hi))
        half *= 2.0
    return None
