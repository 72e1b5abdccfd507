import math

import numpy as np
import pytest

from stein_bounds.config import DEFAULT_CONFIG, QuadratureConfig, load_config
from stein_bounds.errors import NonConvergent
from stein_bounds.quadrature import CumulativeIntegral, integrate, make_map, quad


class TestIntegrate:
    def test_polynomial_exact(self):
        res = integrate(lambda x: 3 * x**2, 0.0, 2.0)
        assert res.converged
        np.testing.assert_allclose(res.value, 8.0, rtol=1e-14)

    def test_gaussian_real_line(self):
        val = quad(lambda x: np.exp(-x * x / 2), -np.inf, np.inf)
        np.testing.assert_allclose(val, math.sqrt(2 * math.pi), rtol=1e-12)

    def test_half_lines(self):
        np.testing.assert_allclose(quad(lambda x: np.exp(-x), 0.0, np.inf), 1.0, rtol=1e-12)
        np.testing.assert_allclose(quad(lambda x: np.exp(x), -np.inf, 0.0), 1.0, rtol=1e-12)

    def test_endpoint_singularity(self):
        # integrable 1/sqrt singularity at 0
        np.testing.assert_allclose(quad(lambda x: 1 / np.sqrt(x), 0.0, 1.0), 2.0, rtol=1e-8)

    def test_bulk_hints_catch_narrow_spike(self):
        # nodes never sit on a panel edge, so the spike needs its location and width
        f = lambda x: np.exp(-(((x - 37.0) / 1e-3) ** 2))
        res = integrate(f, -np.inf, np.inf, center=37.0, scale=1e-3, breakpoints=[37.0 - 4e-3, 37.0 + 4e-3])
        np.testing.assert_allclose(res.value, 1e-3 * math.sqrt(math.pi), rtol=1e-9)

    def test_reversed_and_empty(self):
        assert quad(lambda x: x, 1.0, 1.0) == 0.0
        np.testing.assert_allclose(quad(lambda x: x, 1.0, 0.0), -0.5, rtol=1e-14)

    def test_divergent_raises(self):
        with pytest.raises(NonConvergent):
            quad(lambda x: 1 / x, 0.0, 1.0, DEFAULT_CONFIG.replace(max_panels=200))

    def test_error_estimate_reported(self):
        res = integrate(np.cos, 0.0, 10.0)
        assert res.error <= 1e-8 * abs(res.value) + 1e-10
        np.testing.assert_allclose(res.value, math.sin(10.0), atol=1e-12)


class TestMaps:
    @pytest.mark.parametrize("a,b", [(0.0, 1.0), (0.0, np.inf), (-np.inf, 2.0), (-np.inf, np.inf)])
    def test_map_roundtrip_and_jacobian(self, a, b):
        m = make_map(a, b, center=0.5, scale=2.0)
        t = np.linspace(m.t_lo, m.t_hi, 21)[1:-1]
        x = m.x(t)
        assert np.all((x > a) & (x < b)) and np.all(np.diff(x) > 0)
        np.testing.assert_allclose(m.t(x), t, rtol=1e-12, atol=1e-14)
        h = 1e-6 * (m.t_hi - m.t_lo)
        fd = (m.x(t + h) - m.x(t - h)) / (2 * h)
        np.testing.assert_allclose(m.jac(t), fd, rtol=1e-6)


class TestCumulativeIntegral:
    def test_left_right_sum_to_total(self):
        ci = CumulativeIntegral(lambda x: np.exp(-x * x / 2), -np.inf, np.inf)
        x = np.linspace(-6, 6, 25)
        np.testing.assert_allclose(ci.left(x) + ci.right(x), ci.total, rtol=1e-12)

    def test_tail_relative_accuracy(self):
        ci = CumulativeIntegral(lambda x: np.exp(-x), 0.0, np.inf)
        x = np.array([1.0, 10.0, 30.0])
        np.testing.assert_allclose(ci.right(x), np.exp(-x), rtol=1e-9)
        np.testing.assert_allclose(ci.left(x), -np.expm1(-x), rtol=1e-9)


class TestConfig:
    def test_roundtrip(self):
        c = QuadratureConfig(abs_tol=1e-9, seed=3)
        assert QuadratureConfig.from_dict(c.to_dict()) == c

    def test_replace_ignores_none(self):
        c = DEFAULT_CONFIG.replace(abs_tol=None, rel_tol=1e-6)
        assert c.abs_tol == DEFAULT_CONFIG.abs_tol and c.rel_tol == 1e-6

    def test_env_file(self, tmp_path, monkeypatch):
        path = tmp_path / "c.json"
        path.write_text('{"rel_tol": 1e-7, "seed": 9}')
        monkeypatch.setenv("STEIN_BOUNDS_CONFIG", str(path))
        c = load_config()
        assert c.rel_tol == 1e-7 and c.seed == 9
