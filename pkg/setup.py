#!/usr/bin/env python
# -*- coding: utf-8 -*-


try:
    from setuptools import setup, find_packages
except ImportError:
    from distutils.core import setup, find_packages


with open("README.md") as readme_file:
    readme = readme_file.read()

with open("HISTORY.md") as history_file:
    history = history_file.read().replace(".. :changelog:", "")

with open("requirements.txt") as requirements_file:
    requirements = requirements_file.read()

test_requirements = ["pytest", "pytest-cov", "coverage", "flake8"]

setup(
    name="graphdistill",
    version="0.1.0",
    description="graphdistill distills graph convolutional networks into boosted "
    "ensembles of graph-free MLP students.",
    long_description=readme + "\n\n" + history,
    long_description_content_type="text/markdown",
    packages=find_packages(
        exclude=["tests", "*.tests", "*.tests.*", "tests.*", "test_*"]
    ),
    package_data={"graphdistill": ["specs/*.json"]},
    include_package_data=True,
    install_requires=requirements,
    license="MIT",
    zip_safe=False,
    keywords="graphdistill",
    classifiers=[
        "Development Status :: 2 - Pre-Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Natural Language :: English",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
    ],
    python_requires=">=3.8",
    entry_points={"console_scripts": ["graphdistill = graphdistill.commandline:cli"]},
    test_suite="tests",
    tests_require=test_requirements,
)
