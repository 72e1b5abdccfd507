import numpy as np
import pytest
from scipy.special import ndtr, owens_t

from stein_bounds import _kernels_py, kernels

try:
    from stein_bounds import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

BACKENDS = [_kernels_py] + ([_kernels_c] if _kernels_c is not None else [])


def owen_cdf(z, lam):
    """Skew-normal cdf through Owen's T function, used only as a test oracle."""
    return ndtr(z) - 2 * owens_t(z, lam)


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
class TestSkewNormalCdf:
    @pytest.mark.parametrize("lam", [-20.0, -2.0, -0.5, 0.0, 0.5, 1.0, 5.0, 50.0])
    def test_matches_owens_t(self, mod, lam):
        z = np.linspace(-6, 6, 97)
        np.testing.assert_allclose(mod.skewnorm_cdf_std(z, lam), owen_cdf(z, lam), atol=2e-15)

    def test_sf_complements_cdf(self, mod):
        z = np.linspace(-5, 5, 41)
        total = mod.skewnorm_cdf_std(z, 3.0) + mod.skewnorm_sf_std(z, 3.0)
        np.testing.assert_allclose(total, 1.0, atol=1e-15)

    def test_reflection(self, mod):
        z = np.linspace(-4, 4, 33)
        np.testing.assert_allclose(mod.skewnorm_cdf_std(z, 2.5), mod.skewnorm_sf_std(-z, -2.5), atol=1e-15)

    def test_deep_tail_relative(self, mod):
        # upper tail of SN(lam>0) behaves like 2 * normal tail
        z = np.array([10.0, 20.0])
        np.testing.assert_allclose(mod.skewnorm_sf_std(z, 4.0), 2 * ndtr(-z), rtol=1e-10)

    def test_scalar_input(self, mod):
        assert np.ndim(mod.skewnorm_cdf_std(0.3, 1.0)) == 0 or np.size(mod.skewnorm_cdf_std(0.3, 1.0)) == 1


def test_backend_recorded():
    assert kernels.BACKEND in {"cython", "python"}


@pytest.mark.skipif(_kernels_c is None, reason="extension not built")
def test_backends_agree():
    z = np.random.default_rng(0).normal(0, 3, 500)
    for lam in (0.3, 7.0, -4.0):
        np.testing.assert_allclose(_kernels_c.skewnorm_cdf_std(z, lam), _kernels_py.skewnorm_cdf_std(z, lam),
                                   atol=1e-15)


def test_pure_python_switch():
    import os
    import subprocess
    import sys

    env = dict(os.environ, STEIN_BOUNDS_PURE_PYTHON="1")
    code = ("from stein_bounds import kernels, SkewNormal, Normal, compute_bounds; "
            "print(kernels.BACKEND, compute_bounds(Normal(0, 1), SkewNormal(0, 1, 2.0)).lower)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout
    backend, value = out.split()
    assert backend == "python"
    np.testing.assert_allclose(float(value), np.sqrt(2 / np.pi) * 2 / np.sqrt(5), atol=1e-12)
