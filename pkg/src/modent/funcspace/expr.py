"""Expression nodes with exact derivative jets.

Every node evaluates a *jet*: an array of shape ``(n + 1, m)`` holding the
values of the function and its first ``n`` derivatives at ``m`` points.
Products use the Leibniz rule, compositions with ``exp`` and ``1/e`` use the
standard recurrences, so no finite differencing ever enters a derivative.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial import hermite_e
from numpy.polynomial import polynomial as npoly

INF = math.inf

# exp(-w) underflows to exactly 0 beyond this; polynomial prefactors stay finite.
_EXP_CUTOFF = 700.0


def leibniz(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Jet of a product from the jets of its factors."""
    n = a.shape[0] - 1
    out = np.zeros_like(a)
    for m in range(n + 1):
        acc = 0.0
        for j in range(m + 1):
            acc = acc + math.comb(m, j) * a[j] * b[m - j]
        out[m] = acc
    return out


def compose_jets(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Jet of ``F(u(x))`` given the jet of ``F`` at ``u(x)`` and the jet of ``u``.

    Uses truncated Taylor arithmetic (equivalent to Faa di Bruno).
    """
    n = inner.shape[0] - 1
    fact = np.array([math.factorial(j) for j in range(n + 1)], dtype=float)
    v = inner / fact[:, None]
    v[0] = 0.0
    ftay = outer / fact[:, None]
    out = np.zeros_like(inner)
    out[0] = ftay[0]
    power = np.zeros_like(v)
    power[0] = 1.0
    for j in range(1, n + 1):
        new = np.zeros_like(v)
        # power <- power * v, truncated at order n
        for m in range(1, n + 1):
            acc = 0.0
            for i in range(0, m):
                acc = acc + power[i] * v[m - i]
            new[m] = acc
        power = new
        out = out + ftay[j] * power
    return out * fact[:, None]


def _hull(supports):
    lo = min(s[0] for s in supports)
    hi = max(s[1] for s in supports)
    return (lo, hi)


def _fmt(c: float) -> str:
    return repr(float(c))


class Expr:
    """Base class. Subclasses implement ``_jet``."""

    support: tuple = (-INF, INF)

    def jet(self, x: np.ndarray, n: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self._jet(x, int(n))

    def _jet(self, x, n):  # pragma: no cover - abstract
        raise NotImplementedError

    def breakpoints(self) -> tuple:
        return ()

    def key(self) -> str:  # pragma: no cover - abstract
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.key()}>"


class Const(Expr):
    def __init__(self, value: float):
        self.value = float(value)
        self.support = (-INF, INF) if self.value != 0.0 else (0.0, 0.0)

    def _jet(self, x, n):
        out = np.zeros((n + 1,) + x.shape)
        out[0] = self.value
        return out

    def key(self):
        return _fmt(self.value)


class Var(Expr):
    def _jet(self, x, n):
        out = np.zeros((n + 1,) + x.shape)
        out[0] = x
        if n >= 1:
            out[1] = 1.0
        return out

    def key(self):
        return "x"


class Poly(Expr):
    """Polynomial with ascending real coefficients."""

    def __init__(self, coeffs):
        c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
        self.coeffs = c if c.size else np.zeros(1)
        self.support = (-INF, INF) if np.any(self.coeffs) else (0.0, 0.0)

    def _jet(self, x, n):
        out = np.zeros((n + 1,) + x.shape)
        c = self.coeffs
        for m in range(n + 1):
            if c.size == 0:
                break
            out[m] = npoly.polyval(x, c)
            c = npoly.polyder(c) if c.size > 1 else np.zeros(0)
        return out

    def key(self):
        return "poly(" + ", ".join(_fmt(c) for c in self.coeffs) + ")"


class Sum(Expr):
    def __init__(self, *terms: Expr):
        self.terms = tuple(terms)
        live = [t.support for t in self.terms if t.support[0] < t.support[1]]
        self.support = _hull(live) if live else (0.0, 0.0)

    def _jet(self, x, n):
        out = np.zeros((n + 1,) + x.shape)
        for t in self.terms:
            out = out + t.jet(x, n)
        return out

    def breakpoints(self):
        return tuple(p for t in self.terms for p in t.breakpoints())

    def key(self):
        return "(" + " + ".join(t.key() for t in self.terms) + ")"


class Prod(Expr):
    def __init__(self, a: Expr, b: Expr):
        self.a, self.b = a, b
        lo = max(a.support[0], b.support[0])
        hi = min(a.support[1], b.support[1])
        self.support = (lo, hi) if lo <= hi else (lo, lo)

    def _jet(self, x, n):
        return leibniz(self.a.jet(x, n), self.b.jet(x, n))

    def breakpoints(self):
        return self.a.breakpoints() + self.b.breakpoints()

    def key(self):
        return f"({self.a.key()} * {self.b.key()})"


class Scale(Expr):
    def __init__(self, c: float, e: Expr):
        self.c, self.e = float(c), e
        self.support = e.support if self.c != 0.0 else (0.0, 0.0)

    def _jet(self, x, n):
        return self.c * self.e.jet(x, n)

    def breakpoints(self):
        return self.e.breakpoints()

    def key(self):
        return f"({_fmt(self.c)} * {self.e.key()})"


class Affine(Expr):
    """``e(alpha * x + beta)``."""

    def __init__(self, e: Expr, alpha: float, beta: float):
        if alpha == 0:
            raise ValueError("affine substitution needs a nonzero slope")
        self.e, self.alpha, self.beta = e, float(alpha), float(beta)
        lo, hi = e.support
        if lo > hi or (lo == hi):
            self.support = ((lo - self.beta) / self.alpha,) * 2
        else:
            ends = sorted(((lo - self.beta) / self.alpha, (hi - self.beta) / self.alpha))
            self.support = (ends[0], ends[1])

    def _jet(self, x, n):
        inner = self.e.jet(self.alpha * x + self.beta, n)
        scale = self.alpha ** np.arange(n + 1)
        return inner * scale.reshape((-1,) + (1,) * x.ndim)

    def breakpoints(self):
        return tuple((p - self.beta) / self.alpha for p in self.e.breakpoints())

    def key(self):
        return f"{self.e.key()}@({_fmt(self.alpha)}*x+{_fmt(self.beta)})"


class Exp(Expr):
    def __init__(self, e: Expr):
        self.e = e

    def _jet(self, x, n):
        ej = self.e.jet(x, n)
        h = np.zeros_like(ej)
        h[0] = np.exp(ej[0])
        for m in range(1, n + 1):
            acc = 0.0
            for j in range(m):
                acc = acc + math.comb(m - 1, j) * h[j] * ej[m - j]
            h[m] = acc
        return h

    def breakpoints(self):
        return self.e.breakpoints()

    def key(self):
        return f"exp({self.e.key()})"


class Pow(Expr):
    def __init__(self, e: Expr, p: int):
        if int(p) != p or p < 0:
            raise ValueError("power must be a nonnegative integer")
        self.e, self.p = e, int(p)
        self.support = e.support if self.p >= 1 else (-INF, INF)

    def _jet(self, x, n):
        base = self.e.jet(x, n)
        out = np.zeros_like(base)
        out[0] = 1.0
        p = self.p
        while p:
            if p & 1:
                out = leibniz(out, base)
            p >>= 1
            if p:
                base = leibniz(base, base)
        return out

    def breakpoints(self):
        return self.e.breakpoints()

    def key(self):
        return f"({self.e.key()})^{self.p}"


@lru_cache(maxsize=None)
def _bump_numerators(m: int) -> tuple:
    """Polynomials P_j with bump^(j) = bump * P_j / (1 - x^2)^(2j), j <= m."""
    polys = [np.array([1.0])]
    one_minus = np.array([1.0, 0.0, -1.0])
    one_minus_sq = npoly.polymul(one_minus, one_minus)
    for j in range(m):
        p = polys[-1]
        nxt = npoly.polymul(npoly.polyder(p) if p.size > 1 else np.zeros(1), one_minus_sq)
        nxt = npoly.polyadd(nxt, npoly.polymul(4.0 * j * npoly.polymul([0.0, 1.0], p), one_minus))
        nxt = npoly.polysub(nxt, npoly.polymul([0.0, 2.0], p))
        polys.append(nxt)
    return tuple(polys)


class Bump(Expr):
    """``exp(-1/(1-x^2))`` on (-1, 1), extended by zero."""

    support = (-1.0, 1.0)

    def _jet(self, x, n):
        out = np.zeros((n + 1,) + x.shape)
        inside = np.abs(x) < 1.0
        if not np.any(inside):
            return out
        xi = x[inside]
        t = (1.0 - xi) * (1.0 + xi)
        logt = np.log(t)
        polys = _bump_numerators(n)
        for m in range(n + 1):
            expo = -1.0 / t - 2.0 * m * logt
            out[m][inside] = np.exp(expo) * npoly.polyval(xi, polys[m])
        return out

    def key(self):
        return "bump(x)"


class Gauss(Expr):
    """``exp(-x^2/2)``."""

    def _jet(self, x, n):
        out = np.zeros((n + 1,) + x.shape)
        g = np.exp(-0.5 * x * x)
        for m in range(n + 1):
            c = np.zeros(m + 1)
            c[m] = 1.0
            out[m] = (-1) ** m * hermite_e.hermeval(x, c) * g
        return out

    def key(self):
        return "gauss(x)"


@lru_cache(maxsize=None)
def _halfexp_polys(m: int) -> tuple:
    """Q_j(w) with d^j/du^j exp(-1/u) = exp(-w) Q_j(w), w = 1/u."""
    polys = [np.array([1.0])]
    for _ in range(m):
        q = polys[-1]
        dq = npoly.polyder(q) if q.size > 1 else np.zeros(1)
        polys.append(npoly.polymul([0.0, 0.0, 1.0], npoly.polysub(q, dq)))
    return tuple(polys)


def _halfexp_jet(u: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n + 1,) + u.shape)
    live = u > 1.0 / _EXP_CUTOFF
    if np.any(live):
        w = 1.0 / u[live]
        e = np.exp(-w)
        polys = _halfexp_polys(n)
        for m in range(n + 1):
            out[m][live] = e * npoly.polyval(w, polys[m])
    return out


class Recip(Expr):
    """``1 / e``; callers guarantee ``e`` stays away from zero."""

    def __init__(self, e: Expr):
        self.e = e

    def _jet(self, x, n):
        ej = self.e.jet(x, n)
        r = np.zeros_like(ej)
        r[0] = 1.0 / ej[0]
        for m in range(1, n + 1):
            acc = 0.0
            for j in range(m):
                acc = acc + math.comb(m, j) * r[j] * ej[m - j]
            r[m] = -r[0] * acc
        return r

    def key(self):
        return f"(1/{self.e.key()})"


class Step(Expr):
    """Smooth step: 0 for t <= -1, 1 for t >= 1, ``h(1+t)/(h(1+t)+h(1-t))`` between,
    with ``h(u) = exp(-1/u)`` for u > 0."""

    support = (-1.0, INF)

    def _jet(self, x, n):
        out = np.zeros((n + 1,) + x.shape)
        out[0][x >= 1.0] = 1.0
        mid = (x > -1.0) & (x < 1.0)
        if np.any(mid):
            t = x[mid]
            a = _halfexp_jet(1.0 + t, n)
            b = _halfexp_jet(1.0 - t, n)
            b = b * ((-1.0) ** np.arange(n + 1))[:, None]
            den = a + b
            r = np.zeros_like(den)
            r[0] = 1.0 / den[0]
            for m in range(1, n + 1):
                acc = 0.0
                for j in range(m):
                    acc = acc + math.comb(m, j) * r[j] * den[m - j]
                r[m] = -r[0] * acc
            out[:, mid] = leibniz(a, r)
        return out

    def key(self):
        return "step(x)"


class Deriv(Expr):
    """``e^(m)``."""

    def __init__(self, e: Expr, m: int):
        if m < 0:
            raise ValueError("derivative order must be nonnegative")
        self.e, self.m = e, int(m)
        self.support = e.support

    def _jet(self, x, n):
        return self.e.jet(x, n + self.m)[self.m:]

    def breakpoints(self):
        return self.e.breakpoints()

    def key(self):
        return f"D{self.m}[{self.e.key()}]"


class Cut(Expr):
    """``chi_[a,b] * e``. Derivatives of order >= ``one_sided_order`` at the
    endpoints are one-sided (taken from inside)."""

    def __init__(self, e: Expr, a: float, b: float, one_sided_order: int):
        self.e, self.a, self.b = e, float(a), float(b)
        self.one_sided_order = int(one_sided_order)
        lo = max(e.support[0], self.a)
        hi = min(e.support[1], self.b)
        self.support = (lo, hi) if lo <= hi else (lo, lo)

    def _jet(self, x, n):
        out = self.e.jet(x, n)
        mask = (x >= self.a) & (x <= self.b)
        return out * mask

    def breakpoints(self):
        return self.e.breakpoints() + (self.a, self.b)

    def key(self):
        return f"cut[{_fmt(self.a)},{_fmt(self.b)}]({self.e.key()})"
