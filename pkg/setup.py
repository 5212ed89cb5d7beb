"""Build script: compiles the optional stepping kernel.

The package is fully functional without the extension (a pure-numpy
fallback is selected at import time); the compiled kernel exists because
the ensemble suites step small spectral systems ~1e8 times, where Python
call overhead dominates.  If Cython or a C compiler is unavailable the
build proceeds without the extension.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/ostrovsky/_kernels.pyx",
        compiler_directives={"language_level": 3},
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
        ext.extra_compile_args.append("-O3")
        # Inline complex multiplies instead of calling the inf/NaN-patching
        # libgcc helper; finite-value results are bit-identical and the
        # blow-up detector only needs non-finite values to propagate.
        ext.extra_compile_args.append("-fcx-limited-range")
except ImportError:
    pass

setup(ext_modules=ext_modules)
