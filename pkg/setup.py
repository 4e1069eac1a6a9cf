from setuptools import setup, find_packages
import re

def requires(path='requirements.txt'):
    """ gets packages from a requirements file """
    with open(path) as infile:
        return infile.read().splitlines()

## Version lives in one place, BIZ/__init__.py
INITFILE = "BIZ/__init__.py"
CUR_VERSION = re.search(r"^__version__ = ['\"]([^'\"]*)['\"]",
                    open(INITFILE, "r").read(),
                    re.M).group(1)

setup(
    name="BIZ",
    version=CUR_VERSION,
    description="Bessel Interlacing of Zeros: zeros of J_k, the F_k branches,"\
                " the G_{k,m} curves and a checker for their interlacing",
    long_description=open('README.md').read(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests"]),
    install_requires=requires(),
    extras_require={
        "test": requires('requirements_test.txt'),
    },
    entry_points={
            'console_scripts': [
                'BIZ = BIZ.__main__:main',
            ],
    },
    license='GPL',
    classifiers=[
        'Programming Language :: Python',
        'Programming Language :: Python :: 3.8',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
)
