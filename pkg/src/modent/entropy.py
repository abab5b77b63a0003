"""Local entropies of the current and its derivative nets on intervals.

All formulas are stated on ``B = (-1, 1)``; an interval ``(c - R, c + R)`` is
handled by translating to the origin and dilating by ``R``. Under that map a
representative ``g`` of a class in H^(k) becomes ``R^(1-k) g(c + R x)``, so
every entropy reduces to a single kernel on ``B``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConsistencyError, ExtensionMismatch, MomentError, NormalizationError
from .funcspace import (
    B,
    IntervalRegion,
    TestFunction,
    antiderivative_chain,
    effective_window,
    integrate,
    variance_on,
)
from .funcspace import expr as E
from .kspaces import KVector
from .modular import cutting_apply, modular_generator

QUAD_TOL = 1e-12
MOMENT_TOL = 1e-8
BOUNDARY_TOL = 1e-7
FLOOR = -1e-8
PATHS = ("closed_form", "modular_path")


@dataclass
class EntropyReport:
    """Entropy value (nats) with the path that produced it and cross-check data."""

    value: float
    path: str
    k: int
    region: IntervalRegion
    residual_vs_other_path: float | None = None
    normalization: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.path not in PATHS:
            raise ValueError(f"unknown path {self.path!r}")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "path": self.path,
            "k": self.k,
            "region": [self.region.a, self.region.b],
            "residual_vs_other_path": self.residual_vs_other_path,
            "normalization": _plain(self.normalization),
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _checked(value: float, scale: float) -> float:
    """Reject values below the numerical zero floor (relative to the positive part)."""
    if value < FLOOR * (1.0 + abs(scale)):
        raise ConsistencyError(f"entropy {value:.3e} is negative beyond rounding")
    return value


class _Fn:
    """Quadrature integrand with explicit breakpoints."""

    def __init__(self, fn, bps=()):
        self.fn, self._bps = fn, tuple(bps)

    def breakpoints(self):
        return self._bps

    def __call__(self, x):
        return self.fn(x)


def _quad(fn, interval, bps=()) -> float:
    return integrate(_Fn(fn, bps), interval, QUAD_TOL)


def _to_unit(g: TestFunction, k: int, region: IntervalRegion) -> TestFunction:
    """``R^(1-k) g(c + R x)``."""
    c, R = region.center, region.radius
    if c == 0.0 and R == 1.0:
        return g
    out = g.compose_affine(R, c)
    return out * R ** (1 - k) if k > 1 else out


def _form_terms(f: TestFunction, region: IntervalRegion) -> tuple:
    """``(pi/R) int_I (R^2 - (x-c)^2) f'^2`` and ``(pi/R) int_I f^2``."""
    c, R = region.center, region.radius
    bps = f.breakpoints()

    def grad(x):
        return (R * R - (x - c) ** 2) * f.jet(x, 1)[1] ** 2

    def sq(x):
        return f(x) ** 2

    return math.pi / R * _quad(grad, region, bps), math.pi / R * _quad(sq, region, bps)


def normalized_moments(f: TestFunction, region: IntervalRegion, count: int) -> np.ndarray:
    """Moments ``int_B x^n f(c + R x) dx``, ``n < count``: the dilation-invariant form
    of the moments of ``f`` on ``region``."""
    c, R = region.center, region.radius
    bps = f.breakpoints()
    out = []
    for n in range(count):
        out.append(_quad(lambda x, n=n: ((x - c) / R) ** n * f(x), region, bps) / R)
    return np.array(out)


def entropy_current(f: TestFunction, I: IntervalRegion = B, cross_check: bool = False) -> EntropyReport:
    """``(pi/R) int_I (R^2 - (x-c)^2) f'(x)^2 dx`` for the current on ``I``."""
    value, _ = _form_terms(f, I)
    report = EntropyReport(_checked(value, value), "closed_form", 1, I,
                           normalization={"center": I.center, "scale": I.radius})
    if cross_check:
        other = entropy_modular_path(KVector(f, 1), I)
        report.residual_vs_other_path = abs(other.value - value)
    return report


def boundary_polynomial(g: TestFunction, k: int) -> np.ndarray:
    """Ascending coefficients of the polynomial ``q`` of degree ``<= 2k-3`` with
    ``q^(n)(+-1) = g^(n)(+-1)`` for ``n <= k-2``. Subtracting it leaves the class
    ``[g]_k`` unchanged."""
    m = k - 1
    jet = g.jet(np.array([-1.0, 1.0]), m - 1)
    deg = 2 * m
    rows, rhs = [], []
    for side, x0 in enumerate((-1.0, 1.0)):
        for n in range(m):
            row = [math.perm(j, n) * x0 ** (j - n) if j >= n else 0.0 for j in range(deg)]
            rows.append(row)
            rhs.append(jet[n, side])
    return np.linalg.solve(np.array(rows), np.array(rhs))


def _unit_representative(v: KVector, region: IntervalRegion) -> tuple:
    """Representative on ``B`` with vanishing boundary data up to order ``k-2``."""
    k = v.k
    g = _to_unit(v.rep, k, region)
    record = {"center": region.center, "scale": region.radius}
    if k == 1:
        return g, record
    coeffs = boundary_polynomial(g, k)
    h = g - TestFunction(E.Poly(coeffs)) if np.any(coeffs) else g
    left = h.jet(np.array([-1.0, 1.0]), k - 2)
    worst = float(np.max(np.abs(left)))
    if worst > BOUNDARY_TOL:
        raise NormalizationError("boundary data could not be removed", left.T.ravel().tolist())
    record["boundary_polynomial"] = coeffs.tolist()
    record["boundary_residual"] = worst
    return h, record


def _kspace_value(h: TestFunction, k: int) -> tuple:
    def top(x):
        return (1.0 - x * x) * h.jet(x, k)[k] ** 2

    def low(x):
        return h.jet(x, k - 1)[k - 1] ** 2

    bps = h.breakpoints()
    pos = math.pi * _quad(top, B, bps)
    neg = math.pi * k * (k - 1) * _quad(low, B, bps) if k > 1 else 0.0
    return pos - neg, pos


def entropy_k(v: KVector, region: IntervalRegion = B, cross_check: bool = False) -> EntropyReport:
    """Entropy of ``[g]_k`` relative to H^(k)(region):
    ``pi int_B (1-x^2) g^(k)^2 - pi k(k-1) int_B g^(k-1)^2`` on the normalized representative."""
    h, record = _unit_representative(v, region)
    value, pos = _kspace_value(h, v.k)
    report = EntropyReport(_checked(value, pos), "closed_form", v.k, region, normalization=record)
    if cross_check:
        report.residual_vs_other_path = abs(_modular_value(h, v.k) - value)
    return report


def _modular_value(h: TestFunction, k: int) -> float:
    gen = cutting_apply(modular_generator(h, k), k, B)

    def integrand(x):
        return h.jet(x, k)[k] * gen.jet(x, k - 1)[k - 1]

    return _quad(integrand, B, h.breakpoints() + (-1.0, 1.0))


def entropy_modular_path(v, region: IntervalRegion = B, k: int | None = None) -> EntropyReport:
    """The same entropy through the cut generator: ``int_B g^(k) (chi_B G g)^(k-1) dx``.

    ``v`` is a :class:`KVector`, or a TestFunction together with ``k``.
    Raises :class:`CutNotAdmissible` if the cut generator has boundary data.
    """
    if not isinstance(v, KVector):
        v = KVector(v, 1 if k is None else k)
    h, record = _unit_representative(v, region)
    value = _modular_value(h, v.k)
    return EntropyReport(_checked(value, abs(value)), "modular_path", v.k, region,
                         normalization=record)


def representative_normalize(f: TestFunction, k: int, I: IntervalRegion = B) -> TestFunction:
    """``g`` with ``g^(k-1) = f`` and ``g^(n)`` zero at both endpoints of ``I``, ``n <= k-2``."""
    g = antiderivative_chain(f, k, I.a)
    if k == 1:
        return g
    right = g.jet(np.array([I.b]), k - 2)[:, 0]
    scale = I.radius ** np.arange(k - 1, 0, -1)  # dilation weights of g^(n)
    if np.any(np.abs(right / scale) > BOUNDARY_TOL):
        raise NormalizationError(
            f"no representative with vanishing boundary data at x = {I.b:g}; "
            "the moments of f on the interval do not vanish", right.tolist())
    return g


def _moment_check(f: TestFunction, k: int, I: IntervalRegion) -> np.ndarray:
    moments = normalized_moments(f, I, k - 1)
    if np.any(np.abs(moments) > MOMENT_TOL):
        raise MomentError(
            "moments of orders 0.." f"{k - 2} must vanish on ({I.a:g}, {I.b:g}); got "
            + ", ".join(f"{m:.3e}" for m in moments), moments)
    return moments


def entropy_subnet(f: TestFunction, k: int, I: IntervalRegion = B,
                   cross_check: bool = False) -> EntropyReport:
    """Entropy of ``[f]_1`` relative to the subnet H_(k)(I):
    ``(pi/R) int (R^2 - (x-c)^2) f'^2 - (pi/R) k(k-1) int_I f^2``.

    Requires vanishing moments of orders ``0..k-2`` (else :class:`MomentError`).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    moments = _moment_check(f, k, I)
    grad, sq = _form_terms(f, I)
    value = grad - k * (k - 1) * sq
    report = EntropyReport(_checked(value, grad), "closed_form", k, I,
                           normalization={"center": I.center, "scale": I.radius,
                                          "moments": moments.tolist()})
    if cross_check:
        g = representative_normalize(f, k, I)
        other = entropy_modular_path(KVector(g, k), I)
        report.residual_vs_other_path = abs(other.value - value)
    return report


def entropy_subnet_k2(f: TestFunction, I: IntervalRegion = B) -> EntropyReport:
    """``(pi/R) int (R^2 - (x-c)^2) f'^2 - 4 pi Var_I(f)``: the k = 2 subnet entropy
    after subtracting the mean of ``f`` on ``I`` (which does not change ``[f]_1``)."""
    grad, _ = _form_terms(f, I)
    var = variance_on(f, I, QUAD_TOL)
    value = grad - 4.0 * math.pi * var
    mean = _quad(f, I, f.breakpoints()) / I.length
    return EntropyReport(_checked(value, grad), "closed_form", 2, I,
                         normalization={"center": I.center, "scale": I.radius,
                                        "mean_subtracted": mean, "variance": var})


class BoundCheck(NamedTuple):
    lhs: float
    rhs: float
    slack: float
    predicted_slack: float


def universal_bound_check(f: TestFunction, k: int, I: IntervalRegion = B) -> BoundCheck:
    """Subnet entropy ``lhs`` against current entropy ``rhs``; ``slack = rhs - lhs``
    should equal ``(pi/R) k(k-1) int_I f^2``."""
    lhs = entropy_subnet(f, k, I).value
    rhs = entropy_current(f, I).value
    _, sq = _form_terms(f, I)
    return BoundCheck(lhs, rhs, rhs - lhs, k * (k - 1) * sq)


def _anchor(ell: TestFunction) -> float:
    lo = ell.support[0]
    if math.isfinite(lo):
        return lo
    win = effective_window(ell)
    if win is None:
        raise ValueError("ell must decay at -infinity")
    return win[0]


def primitive(ell: TestFunction) -> TestFunction:
    """``L(x) = int_{-inf}^x ell``."""
    return antiderivative_chain(ell, 2, _anchor(ell))


def entropy_increase(ell: TestFunction, I: IntervalRegion = B, check: bool = True) -> float:
    """``4 pi Var_I(L)``, ``L`` the primitive of ``ell``; with ``check`` it is compared
    with the difference of the current and k = 2 subnet entropies of ``L``."""
    L = primitive(ell)
    value = 4.0 * math.pi * variance_on(L, I, QUAD_TOL)
    if check:
        diff = entropy_current(L, I).value - entropy_subnet_k2(L, I).value
        if abs(diff - value) > 1e-7:
            raise ConsistencyError(f"entropy difference {diff!r} != 4 pi Var = {value!r}")
    return value


def _entropy_for(f: TestFunction, k: int, I: IntervalRegion) -> float:
    if k == 1:
        return entropy_current(f, I).value
    if k == 2:
        return entropy_subnet_k2(f, I).value
    return entropy_subnet(f, k, I).value


def extension_independence_check(f_on_I: TestFunction, extensions, k: int,
                                 I: IntervalRegion = B, agree_tol: float = 1e-10,
                                 points: int = 201) -> float:
    """Largest pairwise difference of the entropies of several extensions of ``f|_I``."""
    xs = np.linspace(I.a, I.b, points)
    ref = f_on_I(xs)
    for i, ext in enumerate(extensions):
        gap = float(np.max(np.abs(ext(xs) - ref)))
        if gap > agree_tol:
            raise ExtensionMismatch(f"extension {i} differs from f on the closed interval by {gap:.3e}")
    values = [_entropy_for(ext, k, I) for ext in extensions]
    return max((abs(a - b) for a, b in itertools.combinations(values, 2)), default=0.0)


def average_entropy_limit(f: TestFunction) -> float:
    """``pi int f'^2`` over the whole line."""
    lo, hi = f.support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        win = effective_window(f)
        if win is None:
            raise ValueError("f' must be square integrable")
        lo, hi = win
    if lo >= hi:
        return 0.0
    return math.pi * _quad(lambda x: f.jet(x, 1)[1] ** 2, (lo, hi), f.breakpoints())


def average_entropy_scan(f: TestFunction, k: int, R_values) -> list:
    """``[(R, S(f || H_(k)(B_R)) / R), ...]``."""
    out = []
    for R in R_values:
        out.append((float(R), entropy_subnet(f, k, IntervalRegion.centered(R)).value / R))
    return out
