"""Globally adaptive Gauss-Legendre quadrature.

Each panel is integrated with a 15-point Gauss-Legendre rule and with the same
rule on its two halves; the difference is the panel's error estimate and the
half-panel sum is kept as its value. The panel with the largest estimate is
bisected until the summed estimate is below ``tol``.
"""

from __future__ import annotations

import heapq
import itertools
import math

import numpy as np

from ..errors import NonConvergence

GL_ORDER = 15
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)
DEFAULT_TOL = 1e-10
MAX_PANELS = 5000


def _as_bounds(interval):
    if hasattr(interval, "a"):
        return float(interval.a), float(interval.b)
    a, b = interval
    return float(a), float(b)


def gauss_legendre(f, a: float, b: float):
    """Single 15-point panel. ``f`` may return shape ``(m,)`` or ``(q, m)``."""
    half = 0.5 * (b - a)
    x = half * _NODES + 0.5 * (a + b)
    return half * (np.asarray(f(x), dtype=float) @ _WEIGHTS)


def batched_panels(f, lo, hi):
    """One refined panel per interval ``[lo[j], hi[j]]`` in a single call of ``f``.

    Returns ``(values, errors)`` with ``values`` of shape ``(q, m)`` (``q = 1``
    for scalar integrands) and the per-interval error estimate of shape ``(m,)``.
    """
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    mid = 0.5 * (lo + hi)
    a = np.concatenate([lo, lo, mid])
    b = np.concatenate([hi, mid, hi])
    half = 0.5 * (b - a)
    x = (half[:, None] * _NODES + (0.5 * (a + b))[:, None]).ravel()
    vals = np.asarray(f(x), dtype=float)
    vals = vals.reshape((-1, a.size, GL_ORDER)) @ _WEIGHTS * half
    m = lo.size
    whole, refined = vals[:, :m], vals[:, m:2 * m] + vals[:, 2 * m:]
    return refined, np.max(np.abs(whole - refined), axis=0)


def _panel(f, a, b):
    m = 0.5 * (a + b)
    whole = gauss_legendre(f, a, b)
    left = gauss_legendre(f, a, m)
    right = gauss_legendre(f, m, b)
    refined = left + right
    err = float(np.max(np.abs(whole - refined)))
    return refined, left, right, err


def integrate(f, interval, tol: float = DEFAULT_TOL, *, points=(), max_panels: int = MAX_PANELS):
    """Integrate ``f`` over ``interval`` to absolute error estimate ``tol``.

    ``f`` is a vectorized callable; objects exposing ``support`` and
    ``breakpoints()`` (such as :class:`TestFunction`) have the domain clipped to
    their support and panels split at their breakpoints. Vector-valued
    integrands (shape ``(q, m)``) are supported; the error is the max over
    components.

    Raises :class:`NonConvergence` if ``max_panels`` is exhausted.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b = _as_bounds(interval)
    if not a <= b:
        raise ValueError(f"empty interval ({a}, {b})")
    extra = list(points)
    support = getattr(f, "support", None)
    if support is not None:
        a, b = max(a, support[0]), min(b, support[1])
        if hasattr(f, "breakpoints"):
            extra.extend(f.breakpoints())
    if not math.isfinite(a) or not math.isfinite(b):
        raise ValueError("integration domain must be finite")
    if a >= b:
        probe = np.asarray(f(np.array([a])), dtype=float)
        return np.zeros(probe.shape[:-1]) if probe.ndim > 1 else 0.0

    edges = sorted({a, b} | {float(p) for p in extra if a < p < b})
    counter = itertools.count()
    heap = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        refined, left, right, err = _panel(f, lo, hi)
        heapq.heappush(heap, (-err, next(counter), lo, hi, refined, left, right))

    while True:
        total_err = math.fsum(-item[0] for item in heap)
        scale = math.fsum(float(np.max(np.abs(item[4]))) for item in heap)
        if total_err <= max(tol, 64 * np.finfo(float).eps * scale):
            break
        if len(heap) >= max_panels:
            raise NonConvergence(
                f"adaptive quadrature on ({a}, {b}) stalled at error {total_err:.3e} "
                f"with {len(heap)} panels (tol {tol:.1e})"
            )
        _, _, lo, hi, _, left, right = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise NonConvergence(f"panel ({lo}, {hi}) cannot be bisected further")
        for (clo, chi, whole) in ((lo, mid, left), (mid, hi, right)):
            cm = 0.5 * (clo + chi)
            cl = gauss_legendre(f, clo, cm)
            cr = gauss_legendre(f, cm, chi)
            refined = cl + cr
            err = float(np.max(np.abs(whole - refined)))
            heapq.heappush(heap, (-err, next(counter), clo, chi, refined, cl, cr))

    values = np.array([item[4] for item in heap])
    if values.ndim == 1:
        return math.fsum(values)
    return np.array([math.fsum(col) for col in values.T])
