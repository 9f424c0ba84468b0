import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("TTSVERIFY_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:  # pure-Python install
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("ttsverify._dbm", ["src/ttsverify/_dbm.pyx"])],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
