import sys

from setuptools import Extension, setup

flags = [] if sys.platform == "win32" else ["-O3", "-std=c99", "-ffinite-math-only", "-fno-signed-zeros", "-fno-trapping-math"]

setup(ext_modules=[Extension("mickit._dpcore", ["src/mickit/_dpcore.c"], extra_compile_args=flags)])
