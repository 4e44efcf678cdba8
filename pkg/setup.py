from setuptools import setup, find_packages

setup(
    name="xiflow",
    version="0.3.0",
    description="Numerical laboratory for the Riemann xi-flow, its complex-time Newton flow and the Hamiltonian H = xi(q) p.",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.20",
        "scipy>=1.6",
    ],
    extras_require={
        "test": ["mpmath>=1.2"],
    },
    entry_points={
        "console_scripts": ["xiflow = xiflow.cli:main"],
    },
)
