import math

import numpy as np
import pytest

from modent.errors import CutNotAdmissible, PoleError
from modent.funcspace import B, X, IntervalRegion, bump, gaussian, window
from modent.kspaces import norm_k
from modent.modular import (
    DilationFlow,
    cutting_apply,
    flow_apply,
    flow_derivative_order,
    identity_IdD_check,
    mobius_point,
    modular_generator,
)


def test_mobius_examples():
    for s in (-3.0, 0.4, 7.0):
        assert mobius_point(s, 1.0) == pytest.approx(1.0, abs=1e-15)
        assert mobius_point(s, -1.0) == pytest.approx(-1.0, abs=1e-15)
        assert mobius_point(s, 0.0) == pytest.approx(math.tanh(s / 2), abs=1e-15)


def test_mobius_group_law():
    xs = np.linspace(-0.99, 0.99, 23)
    for s, t in [(0.3, -1.1), (2.0, 0.5), (-0.7, -0.2)]:
        np.testing.assert_allclose(mobius_point(s, mobius_point(t, xs)), mobius_point(s + t, xs),
                                   atol=1e-12)


def test_mobius_pole():
    s = 1.0
    with pytest.raises(PoleError):
        mobius_point(s, -1.0 / math.tanh(s / 2))


def test_flow_identity_and_support():
    f = X * bump(0.5, 0.2)
    assert flow_apply(f, 2, 0.0) is f
    for s in (-0.8, 0.3, 1.5):
        g = flow_apply(f, 2, s)
        lo, hi = g.support
        assert -1.0 < lo < hi < 1.0
        xs = np.linspace(-1, 1, 401)
        outside = (xs < lo) | (xs > hi)
        assert np.all(g(xs)[outside] == 0.0)


def test_flow_matches_point_map():
    f = gaussian(0.4, 0.1)
    s, k = 0.3, 3
    xs = np.linspace(-0.9, 0.9, 11)
    c, d = math.sinh(math.pi * s), math.cosh(math.pi * s)
    expected = (c * xs + d) ** (2 * (k - 1)) * f(mobius_point(2 * math.pi * s, xs))
    np.testing.assert_allclose(flow_apply(f, k, s)(xs), expected, rtol=1e-13)


def test_flow_group_law():
    f = (X + 0.5) * bump(0.6, -0.1)
    xs = np.linspace(-0.95, 0.95, 31)
    for k in (1, 2, 3):
        ab = DilationFlow(k, 0.2).apply(DilationFlow(k, -0.45).apply(f))
        c = DilationFlow(k, 0.2).compose(DilationFlow(k, -0.45)).apply(f)
        np.testing.assert_allclose(ab(xs), c(xs), atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_flow_unitary(k):
    f = (X - 0.1) * bump(0.7)
    ref = norm_k(f, k)
    for s in (-0.4, 0.25):
        assert norm_k(flow_apply(f, k, s), k) == pytest.approx(ref, rel=1e-6)


def test_flow_pole_for_nonlocal_function():
    g = flow_apply(gaussian(), 1, 0.5)
    pole = -1.0 / math.tanh(math.pi * 0.5)
    with pytest.raises(PoleError):
        g(pole)
    assert math.isfinite(g(0.0))


def test_generator_examples():
    xs = np.linspace(-0.9, 0.9, 19)
    g = modular_generator(X * window(-1.0, 1.0), 1)
    np.testing.assert_allclose(g(xs), math.pi * (1 - xs ** 2), atol=1e-14)
    f = (1 - X ** 2) * gaussian()
    for k in (1, 2, 4):
        assert modular_generator(f, k)(np.array([-1.0, 1.0])) == pytest.approx([0.0, 0.0], abs=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_forward_difference_first_order(k):
    f = X * bump(0.8)
    xs = np.linspace(-0.95, 0.95, 77)
    exact = modular_generator(f, k)(xs)
    errs = []
    for h in (1e-4, 5e-5):
        fd = (flow_apply(f, k, h)(xs) - f(xs)) / h
        errs.append(np.max(np.abs(fd - exact)))
    assert errs[0] < 1e-2 * max(1.0, np.max(np.abs(exact)))
    assert errs[1] < 0.6 * errs[0]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_central_difference_second_order(k):
    res = flow_derivative_order(bump(0.7, 0.1), k)
    assert res["order"] >= 1.9


@pytest.mark.parametrize("f, k", [(gaussian(), 2), (bump(), 3), (X ** 3 * window(-1.0, 1.0), 2),
                                  (X * gaussian(0.5), 5)])
def test_identity_IdD(f, k):
    assert identity_IdD_check(f, k) <= 1e-8


def test_cutting_apply():
    xs = np.linspace(-3, 3, 121)
    inside = bump(0.5, 0.2)
    np.testing.assert_array_equal(cutting_apply(inside, 3)(xs), inside(xs))
    outside = bump(0.5, 2.0)
    assert np.all(cutting_apply(outside, 2)(xs) == 0.0)
    g = (X ** 2 - 1) ** 2 * gaussian()
    cut = cutting_apply(g, 2, B)
    mask = np.abs(xs) < 1
    np.testing.assert_allclose(cut(xs[mask]), g(xs[mask]), atol=0)
    assert np.all(cut(xs[~mask]) == 0.0)
    assert -1.0 in cut.breakpoints() and 1.0 in cut.breakpoints()
    with pytest.raises(CutNotAdmissible):
        cutting_apply(g, 3, B)
    with pytest.raises(CutNotAdmissible):
        cutting_apply(gaussian(), 1, IntervalRegion(0.0, 2.0))
