"""Text syntax for test functions.

Grammar (infix, Python-like precedence; ``^`` is accepted for powers)::

    expr   := expr ('+' | '-') expr | expr '*' expr | expr '/' number
            | expr ('^' | '**') int | '-' expr | '(' expr ')' | atom
    atom   := number | 'x' | 'pi' | 'e' | call
    call   := 'exp(' expr ')'
            | ('bump' | 'gauss' | 'gaussian' | 'step') '(' affine ')'
            | 'window(' ('B' | R | a ',' b [',' margin]) ')'

``affine`` is any sub-expression that reduces to ``alpha * x + beta``, so
``bump(2*x - 1)`` or ``gauss((x - 3)/2)`` are valid. ``window`` is the smooth
plateau equal to 1 on the interval.
"""

from __future__ import annotations

import ast
import math

from ..errors import ParseError
from . import core
from .core import TestFunction

_CONSTANTS = {"pi": math.pi, "e": math.e}
_SHAPES = {"bump": core.bump, "gauss": core.gaussian, "gaussian": core.gaussian}


def parse_function(text: str) -> TestFunction:
    """Parse ``text`` into a :class:`TestFunction`; raises :class:`ParseError`."""
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty function literal")
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None
    out = _build(tree.body, text)
    if isinstance(out, float):
        return core.const(out)
    return out


def _number(node, src):
    """Evaluate a constant sub-expression, or return None if it mentions x."""
    val = _build(node, src)
    return val if isinstance(val, float) else None


def _affine(node, src):
    """Return ``(alpha, beta)`` if ``node`` is affine in x."""
    if isinstance(node, ast.Name) and node.id == "x":
        return 1.0, 0.0
    if isinstance(node, ast.Constant) or (isinstance(node, ast.Name) and node.id in _CONSTANTS):
        return 0.0, _build(node, src)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        a, b = _affine(node.operand, src)
        return (-a, -b) if isinstance(node.op, ast.USub) else (a, b)
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, (ast.Add, ast.Sub)):
            a1, b1 = _affine(node.left, src)
            a2, b2 = _affine(node.right, src)
            sgn = 1.0 if isinstance(node.op, ast.Add) else -1.0
            return a1 + sgn * a2, b1 + sgn * b2
        if isinstance(node.op, ast.Mult):
            left, right = _number(node.left, src), _number(node.right, src)
            if left is not None:
                a, b = _affine(node.right, src)
                return left * a, left * b
            if right is not None:
                a, b = _affine(node.left, src)
                return right * a, right * b
        if isinstance(node.op, ast.Div):
            d = _number(node.right, src)
            if d is not None and d != 0.0:
                a, b = _affine(node.left, src)
                return a / d, b / d
    raise ParseError(f"argument is not affine in x in {src!r}")


def _build(node, src):
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ParseError(f"unsupported literal {node.value!r} in {src!r}")
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id == "x":
            return core.identity()
        if node.id in _CONSTANTS:
            return _CONSTANTS[node.id]
        raise ParseError(f"unknown name {node.id!r} in {src!r}")
    if isinstance(node, ast.UnaryOp):
        val = _build(node.operand, src)
        if isinstance(node.op, ast.USub):
            return -val
        if isinstance(node.op, ast.UAdd):
            return val
        raise ParseError(f"unsupported unary operator in {src!r}")
    if isinstance(node, ast.BinOp):
        return _binop(node, src)
    if isinstance(node, ast.Call):
        return _call(node, src)
    raise ParseError(f"unsupported syntax {type(node).__name__} in {src!r}")


def _binop(node, src):
    left = _build(node.left, src)
    if isinstance(node.op, ast.Pow):
        p = _number(node.right, src)
        if p is None or p != int(p) or p < 0:
            raise ParseError(f"exponent must be a nonnegative integer in {src!r}")
        return left ** int(p) if isinstance(left, float) else left ** int(p)
    right = _build(node.right, src)
    if isinstance(node.op, ast.Add):
        return left + right
    if isinstance(node.op, ast.Sub):
        return left - right
    if isinstance(node.op, ast.Mult):
        return left * right
    if isinstance(node.op, ast.Div):
        if not isinstance(right, float):
            raise ParseError(f"division only by constants in {src!r}")
        if right == 0.0:
            raise ParseError(f"division by zero in {src!r}")
        return left / right
    raise ParseError(f"unsupported operator {type(node.op).__name__} in {src!r}")


def _call(node, src):
    if not isinstance(node.func, ast.Name) or node.keywords:
        raise ParseError(f"unsupported call in {src!r}")
    name, args = node.func.id, node.args
    if name == "exp":
        if len(args) != 1:
            raise ParseError(f"exp takes one argument in {src!r}")
        inner = _build(args[0], src)
        return math.exp(inner) if isinstance(inner, float) else core.exp(inner)
    if name in _SHAPES or name == "step":
        if len(args) != 1:
            raise ParseError(f"{name} takes one argument in {src!r}")
        alpha, beta = _affine(args[0], src)
        if alpha == 0.0:
            raise ParseError(f"{name} argument must depend on x in {src!r}")
        if name == "step":
            return core.step(alpha, beta)
        # shape(alpha x + beta) == shape((x - center)/scale) with scale = 1/alpha
        return _SHAPES[name](1.0 / alpha, -beta / alpha) if alpha > 0 else \
            TestFunction(_SHAPES[name]().expr).compose_affine(alpha, beta)
    if name == "window":
        return _window(args, src)
    raise ParseError(f"unknown function {name!r} in {src!r}")


def _window(args, src):
    if len(args) == 1 and isinstance(args[0], ast.Name) and args[0].id == "B":
        return core.window(-1.0, 1.0)
    vals = [_number(a, src) for a in args]
    if any(v is None for v in vals):
        raise ParseError(f"window arguments must be constants or B in {src!r}")
    try:
        if len(vals) == 1:
            return core.window(-vals[0], vals[0])
        if len(vals) in (2, 3):
            return core.window(*vals)
    except ValueError as exc:
        raise ParseError(f"bad window in {src!r}: {exc}") from None
    raise ParseError(f"window takes B, R, (a, b) or (a, b, margin) in {src!r}")
