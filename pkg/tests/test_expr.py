import numpy as np
import pytest

from stein_bounds.errors import InvalidInput
from stein_bounds.expr import compile_expression


class TestCompileExpression:
    def test_arithmetic_and_functions(self):
        f = compile_expression("exp(-x^2/2) * sqrt(abs(x)) + log(1 + x**2)")
        x = np.array([-1.5, 0.0, 2.0])
        want = np.exp(-x**2 / 2) * np.sqrt(np.abs(x)) + np.log(1 + x**2)
        np.testing.assert_allclose(f(x), want, rtol=1e-15)

    def test_constants(self):
        f = compile_expression("pi * x + e")
        np.testing.assert_allclose(f(np.array([1.0])), [np.pi + np.e])

    def test_constant_expression_broadcasts(self):
        assert compile_expression("2")(np.zeros(4)).shape == (4,)

    @pytest.mark.parametrize("text", ["__import__('os')", "x.real", "y + 1", "open('f')", "[x]", "x if x else 1"])
    def test_rejects_unsafe_or_unknown(self, text):
        with pytest.raises(InvalidInput):
            compile_expression(text)

    def test_syntax_error(self):
        with pytest.raises(InvalidInput):
            compile_expression("exp(")
