# Install with:
#   python -m pip install .
# and the test dependencies with:
#   python -m pip install .[test]
from setuptools import (setup, find_packages)

version = {}
with open('hardexec/_version.py') as version_file:
    exec(version_file.read(), version)

setup(
    name="hardexec",
    version=version.get('__version__', "0.0"),
    description="Harden register-IR programs against transient faults, run "
                "them in a simulated secure container or on "
                "overflow-tolerant memory, and measure them with "
                "fault-injection campaigns.",
    license="GPLv3",
    packages=find_packages(exclude=["testsuite", "testsuite.*"]),
    python_requires=">=3.6",
    install_requires=[
        "six",
        "termcolor",
        "numpy>=1.17",
        "cryptography>=3.1",
        "networkx>=2.0",
    ],
    extras_require={
        "test": ["pytest"],
        "docs": ["sphinx"],
    },
    entry_points={
        'console_scripts': [
            'hardexec = hardexec.main:main',
        ],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: GNU General Public License v3 (GPLv3)",
        "Programming Language :: Python :: 3",
        "Topic :: Security",
        "Topic :: System :: Emulators",
    ],
)
