from setuptools import Extension, setup


def get_extensions():
    """The compiled explorer kernel; skipped when Cython is missing."""
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("WARNING: Cython not available. Using pure Python kernel.")
        return []
    extensions = [Extension("anonmutex._kernel", sources=["src/anonmutex/_kernel.pyx"])]
    return cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
        },
    )


setup(ext_modules=get_extensions())
