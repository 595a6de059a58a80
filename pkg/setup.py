import os

import numpy as np
from setuptools import Extension, setup

# Build without the compiled kernels (pure-Python fallback only).
if os.environ.get("LOCPILOT_NO_EXT"):
    setup()
else:
    from Cython.Build import cythonize

    extensions = [
        Extension(
            "locpilot._ckernels",
            ["src/locpilot/_ckernels.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            # keep IEEE semantics so results match the pure-Python backend bit for bit
            extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
        )
    ]
    setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
