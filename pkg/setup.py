from setuptools import setup, find_packages

setup(
    name="multilinear-representation",
    version="1.0.0",
    description="Integer solutions and search bounds for multilinear, determinant and product forms",
    author="Multilinear Representation Team",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    py_modules=["main"],
    install_requires=[
        "numpy>=1.21.0",
        "pandas>=1.5.0",
        "openpyxl>=3.0.0",
        "sympy>=1.9",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0",
            "hypothesis>=6.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "mulrep=main:main",
        ],
    },
    python_requires=">=3.8",
)
