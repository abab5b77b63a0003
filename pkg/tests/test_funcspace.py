import math

import numpy as np
import pytest

from modent.errors import NonConvergence, ParseError
from modent.funcspace import (
    B,
    X,
    IntervalRegion,
    antiderivative_chain,
    bump,
    const,
    evaluate,
    exp,
    gaussian,
    integrate,
    moment,
    parse_function,
    poly,
    step,
    variance_on,
    window,
)

# mpmath, 30 digits: int_{-1}^{1} exp(-1/(1-x^2)) dx
BUMP_INTEGRAL = 0.443993816168079437823048921171


def test_interval_validation():
    with pytest.raises(ValueError):
        IntervalRegion(1.0, 1.0)
    with pytest.raises(ValueError):
        IntervalRegion(0.0, math.inf)
    r = IntervalRegion.centered(3.0)
    assert (r.a, r.b, r.center, r.radius, r.length) == (-3.0, 3.0, 0.0, 3.0, 6.0)


def test_evaluate_examples():
    assert evaluate(gaussian(), 0.0, 1) == 0.0
    for order in range(6):
        assert evaluate(bump(), 1.0, order) == 0.0
        assert evaluate(bump(), -1.0, order) == 0.0
    assert evaluate(X * bump(), 0.0, 1) == pytest.approx(math.exp(-1.0), abs=1e-15)


def test_jets_against_closed_forms():
    xs = np.linspace(-3, 3, 41)
    g = gaussian()
    jet = g.jet(xs, 3)
    e = np.exp(-xs ** 2 / 2)
    np.testing.assert_allclose(jet[1], -xs * e, atol=1e-15)
    np.testing.assert_allclose(jet[2], (xs ** 2 - 1) * e, atol=1e-15)
    np.testing.assert_allclose(jet[3], (3 * xs - xs ** 3) * e, atol=1e-14)
    f = exp(poly([0.0, 2.0]))
    np.testing.assert_allclose(f.jet(xs, 2)[2], 4 * np.exp(2 * xs), rtol=1e-14)


def test_bump_support_and_zero_outside():
    f = bump(0.5, 2.0)
    assert f.support == (1.5, 2.5)
    assert f(np.array([0.0, 1.5, 3.0])).tolist() == [0.0, 0.0, 0.0]


def test_integrate_examples():
    assert integrate(1 - X ** 2, B) == pytest.approx(4 / 3, abs=1e-12)
    assert abs(integrate(X ** 3 * gaussian(), (-2.0, 2.0))) < 1e-14
    assert integrate(bump(), B, 1e-12) == pytest.approx(BUMP_INTEGRAL, abs=1e-12)


def test_integrate_fixed_grid_oracle():
    # independent fixed-grid composite Gauss-Legendre rule
    nodes, weights = np.polynomial.legendre.leggauss(40)
    edges = np.linspace(-1, 1, 201)
    f = bump() * exp(X)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += 0.5 * (b - a) * weights @ f(0.5 * (b - a) * nodes + 0.5 * (a + b))
    assert integrate(f, B, 1e-12) == pytest.approx(total, abs=1e-12)


def test_integrate_nonconvergence():
    with pytest.raises(NonConvergence):
        integrate(step(50.0) * exp(poly([0, 0, 3.0])), (-5.0, 5.0), 1e-16, max_panels=3)


def test_moment_examples():
    assert abs(moment(X, B, 0)) < 1e-15
    assert abs(moment(X ** 2 - 1 / 3, B, 0)) < 1e-15
    assert moment(const(1.0), B, 2) == pytest.approx(2 / 3, abs=1e-14)


def test_variance_examples():
    assert variance_on(const(3.0), B) == pytest.approx(0.0, abs=1e-14)
    assert variance_on(X, B) == pytest.approx(1 / 3, abs=1e-14)
    assert variance_on(X ** 2, B) == pytest.approx(4 / 45, abs=1e-14)
    assert variance_on(X, IntervalRegion(0.0, 2.0)) == pytest.approx(1 / 3, abs=1e-14)


def test_antiderivative_examples():
    xs = np.linspace(-1, 1, 101)
    g = antiderivative_chain(window(-1.0, 1.0), 2, -1.0)
    np.testing.assert_allclose(g(xs), xs + 1, atol=1e-10)
    f = bump()
    assert antiderivative_chain(f, 1, 7.0) is f
    g = antiderivative_chain(X * window(-1.0, 1.0), 2, -1.0)
    np.testing.assert_allclose(g(xs), (xs ** 2 - 1) / 2, atol=1e-10)
    assert abs(g(1.0)) < 1e-12


def test_antiderivative_chain_differentiates_back():
    f = (X ** 2 - X) * bump(1.5)
    xs = np.linspace(-1.4, 1.4, 100)
    for k in (2, 3, 4):
        g = antiderivative_chain(f, k, -1.5)
        jet = g.jet(xs, k - 1)
        np.testing.assert_allclose(jet[k - 1], f(xs), atol=1e-9)
        for n in range(k - 1):
            assert abs(g.jet(np.array([-1.5]), n)[n, 0]) < 1e-12


def test_finite_difference_order_of_jets():
    f = gaussian(0.7, 0.2) * exp(X / 3)
    x0 = 0.37
    for n in range(4):
        exact = f.jet(np.array([x0]), n + 1)[n + 1, 0]
        errs = []
        for h in (1e-2, 5e-3, 2.5e-3):
            lo, hi = f.jet(np.array([x0 - h, x0 + h]), n)[n]
            errs.append(abs((hi - lo) / (2 * h) - exact))
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert min(orders) > 1.9


def test_window_is_plateau():
    w = window(-1.0, 1.0)
    xs = np.linspace(-1, 1, 51)
    np.testing.assert_array_equal(w(xs), np.ones_like(xs))
    assert w.support == (-2.0, 2.0)
    assert w(np.array([-2.0, 2.0])).tolist() == [0.0, 0.0]
    assert 0.0 < w(1.5) < 1.0


def test_arithmetic_and_derivative():
    f = 2 * X * bump() - bump() / 4
    g = f.derivative(2)
    xs = np.linspace(-0.9, 0.9, 7)
    np.testing.assert_allclose(g(xs), f.jet(xs, 2)[2], rtol=0, atol=0)
    h = f.compose_affine(2.0, 1.0)
    np.testing.assert_allclose(h(xs), f(2 * xs + 1), atol=1e-16)


@pytest.mark.parametrize("text, x, expected", [
    ("x*window(B)", 0.5, 0.5),
    ("x^2 - 1/3", 1.0, 2 / 3),
    ("-(x+1)**2", 1.0, -4.0),
    ("exp(x)", 1.0, math.e),
    ("bump(2*x - 1)", 0.5, math.exp(-1.0)),
    ("gauss((x - 3)/2)", 3.0, 1.0),
    ("pi*window(2)", 1.9, math.pi),
    ("window(0, 1, 0.25)", 0.5, 1.0),
    ("x * bump(x)", 0.0, 0.0),
    ("0", 0.3, 0.0),
])
def test_parse_examples(text, x, expected):
    assert parse_function(text)(x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("text", ["", "y", "foo(x)", "x/x", "bump(x^2)", "x**0.5", "1 +",
                                  "window(1, 0)", "exp()"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_function(text)
