import os

import numpy as np
from setuptools import Extension, setup

# The compiled kernels are optional; without Cython the package falls back to
# the pure-Python implementations at import time.
try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("RADAR_SG_NO_EXT"):
    np_root = os.path.dirname(np.__file__)
    ext = Extension(
        "radar_sg._ckernels",
        ["src/radar_sg/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        library_dirs=[os.path.join(np_root, "random", "lib"), os.path.join(np_root, "_core", "lib")],
        libraries=["npyrandom", "npymath", "m"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": 3})

setup(ext_modules=ext_modules)
