from setuptools import Extension, setup

# The identifier scanner is the hot loop (it touches every byte of every
# answer text).  The extension is optional: when the build is unavailable
# the package falls back to the pure-Python scanner at import time.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "multidimer.extract._scan",
                ["src/multidimer/extract/_scan.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
