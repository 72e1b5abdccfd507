"""Hot numeric kernels, compiled when available.

The Cython extension ``_kernels`` is preferred; if it was not built (or
``STEIN_BOUNDS_PURE_PYTHON`` is set) the numpy fallback is used. ``BACKEND``
records which one was picked.
"""
import os

if os.environ.get("STEIN_BOUNDS_PURE_PYTHON"):
    from ._kernels_py import skewnorm_cdf_std, skewnorm_sf_std

    BACKEND = "python"
else:
    try:
        from ._kernels import skewnorm_cdf_std, skewnorm_sf_std

        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import skewnorm_cdf_std, skewnorm_sf_std

        BACKEND = "python"

__all__ = ["BACKEND", "skewnorm_cdf_std", "skewnorm_sf_std"]
