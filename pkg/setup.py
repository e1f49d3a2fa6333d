"""Build script for the optional compiled merge kernel.

The package works without the extension (a pure-Python fallback is
selected at import time), so the build is marked optional: a missing
compiler degrades to the fallback instead of failing the install.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "anatomy._merge_cy",
        sources=["src/anatomy/_merge_cy.pyx"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level="3")

setup(ext_modules=ext_modules)
