"""Tiny arithmetic grammar for user-supplied densities.

Allowed: numbers, the variable ``x``, the constants ``pi`` and ``e``, the
operators ``+ - * / ^`` (``^`` is exponentiation, ``**`` is accepted too),
parentheses, and the functions ``exp log sqrt abs``. Expressions compile to
vectorized numpy callables.
"""
from __future__ import annotations

import ast
import math

import numpy as np

from .errors import InvalidInput

_FUNCS = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_UNARY = (ast.UAdd, ast.USub)


def _check(node: ast.AST, var: str) -> None:
    if isinstance(node, ast.Expression):
        _check(node.body, var)
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, _BINOPS):
            raise InvalidInput(f"operator {type(node.op).__name__} not allowed")
        _check(node.left, var)
        _check(node.right, var)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _UNARY):
            raise InvalidInput(f"operator {type(node.op).__name__} not allowed")
        _check(node.operand, var)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise InvalidInput(f"unknown function in expression: {ast.dump(node.func)}")
        if len(node.args) != 1 or node.keywords:
            raise InvalidInput(f"{node.func.id}() takes exactly one argument")
        _check(node.args[0], var)
    elif isinstance(node, ast.Name):
        if node.id != var and node.id not in _CONSTS:
            raise InvalidInput(f"unknown name {node.id!r} (only {var!r}, pi, e)")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise InvalidInput(f"bad literal {node.value!r}")
    else:
        raise InvalidInput(f"syntax not allowed: {type(node).__name__}")


def compile_expression(text: str, var: str = "x"):
    """Compile ``text`` into ``f(x: ndarray) -> ndarray``."""
    if not isinstance(text, str) or not text.strip():
        raise InvalidInput("expression must be a non-empty string")
    source = text.replace("^", "**")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise InvalidInput(f"cannot parse expression {text!r}: {exc.msg}") from None
    _check(tree, var)
    code = compile(tree, "<density>", "eval")
    env = {"__builtins__": {}, **_FUNCS, **_CONSTS}

    def f(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = eval(code, env, {var: x})
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape).copy()

    f.expression = text
    return f
