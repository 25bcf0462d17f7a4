"""Build the optional compiled propagation kernel.

Without Cython or a C compiler the package still installs and runs on the
pure-Python engine.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("QOSROUTE_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "qosroute.solver._ckernel",
                    ["src/qosroute/solver/_ckernel.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
