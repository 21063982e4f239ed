import numpy as np
from setuptools import Extension, setup
from Cython.Build import cythonize

# Compiled Monte Carlo kernel. The package works without it (pure-numpy
# fallback selected at import), so a failed build here should not block
# installation; setuptools already treats optional_=False extensions as
# fatal, hence the explicit try in cythonize-less environments is not
# needed -- Cython is a declared build requirement.
ext = Extension(
    "wpa._kernels._mc_cython",
    ["src/wpa/_kernels/_mc_cython.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    # fp-contract off: the numpy fallback never fuses multiply-adds, and the
    # backend parity contract needs operation-for-operation compatibility.
    extra_compile_args=["-O3", "-ffp-contract=off"],
)

setup(ext_modules=cythonize([ext], language_level=3))
