"""Smooth test functions with exact derivatives, quadrature and calculus primitives."""

from .core import (
    B,
    AntiDerivative,
    IntervalRegion,
    TestFunction,
    antiderivative_chain,
    bump,
    const,
    effective_window,
    evaluate,
    exp,
    gaussian,
    identity,
    moment,
    poly,
    step,
    variance_on,
    window,
)
from .parse import parse_function
from .quadrature import DEFAULT_TOL, integrate

X = identity()

__all__ = [
    "B", "X", "AntiDerivative", "IntervalRegion", "TestFunction", "DEFAULT_TOL",
    "antiderivative_chain", "bump", "const", "effective_window", "evaluate", "exp",
    "gaussian", "identity", "integrate", "moment", "parse_function", "poly", "step",
    "variance_on", "window",
]
