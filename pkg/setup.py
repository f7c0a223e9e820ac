#!/usr/bin/env python3
from setuptools import find_packages, setup

from pvmw_dp import APP_NAME, VERSION

console_scripts = ['pvmw-dp = pvmw_dp.cli:entrypoint']

setup(
    name=APP_NAME,
    version=VERSION,
    description='Semi-sensitive differential privacy for online linear vector queries and private ERM',
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    author='pvmw-dp developers',
    keywords=['differential privacy', 'multiplicative weights', 'zCDP', 'ERM', 'label privacy'],
    packages=find_packages(exclude=['tests', 'tests.*']),
    classifiers=[
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3',
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
    ],
    python_requires='>=3.7',
    entry_points={'console_scripts': console_scripts},
    install_requires=[
        "numpy>=1.17",
        "scipy>=1.4",
        "pandas>=1.5",
        "ruamel.yaml>=0.17",
        "appdirs>=1.4.3",
        "click>=7.0,<9",
    ],
    include_package_data=True,
)
