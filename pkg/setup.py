from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "paramdoc.stringops._speedups",
                ["src/paramdoc/stringops/_speedups.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            ),
            Extension(
                "paramdoc.seq2seq._gru_speedups",
                ["src/paramdoc/seq2seq/_gru_speedups.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            ),
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
