import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# Compiled resampling/rotation kernels. The package falls back to the numpy
# implementation in sphereflow.kernels.fallback when this extension is absent.
extensions = [
    Extension(
        "sphereflow.kernels._core",
        ["src/sphereflow/kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level="3"))
