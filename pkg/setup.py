from os.path import join, abspath, dirname
from setuptools import setup, find_packages


requirements_txt = join(abspath(dirname(__file__)), 'requirements.txt')
requirements = [l.strip() for l in open(requirements_txt) if l.strip() and not l.startswith('#')]

version = '0.1.0.dev0'


setup(
    name='susy_dfs',
    version=version,
    description="Simulation of decoherence-free subspaces in networks of coupled bosonic and fermionic oscillators, "
                "including supersymmetric boson-fermion pairs.",
    long_description="""Builds boson and fermion oscillator networks in a truncated Fock space, diagonalizes them
                      into independent quasi-particle modes and evolves states exactly, checked against a dense
                      propagator. Scenarios are JSON documents; results are written as CSV or JSON with a metadata
                      sidecar.""",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: POSIX :: Linux",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering :: Physics"
    ],
    keywords='quantum decoherence oscillator supersymmetry simulation',
    license='MIT',
    packages=find_packages(exclude=['ez_setup', 'examples', 'examples.*', 'tests', 'integration_tests']),
    package_data={'susy_dfs': ['schemas/*.json', 'scenarios/*.json']},
    include_package_data=True,
    zip_safe=False,
    python_requires='>=3.8',
    install_requires=requirements,
    extras_require={'test': ['pytest', 'hypothesis', 'jsonschema', 'pyyaml']},
    entry_points={'console_scripts': ['susy-dfs=susy_dfs.cli:main']}
)
