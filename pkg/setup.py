from setuptools import Extension, setup

setup(
    ext_modules=[
        Extension(
            "a2e.crypto_core._prg",
            sources=["src/a2e/crypto_core/_prgmodule.c"],
            libraries=["crypto"],
            extra_compile_args=["-O2", "-Wno-deprecated-declarations"],
            optional=True,
        )
    ]
)
