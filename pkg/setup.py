# Copyright 2026 The RehabAssess Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

from setuptools import find_packages, setup

_dct = {}
with open("rehab_assess/version.py") as f:
    exec(f.read(), _dct)
__version__ = _dct["__version__"]

JAX_URL = "https://storage.googleapis.com/jax-releases/jax_releases.html"

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="rehab-assess",
    version=__version__,
    author="The RehabAssess Authors",
    description="Rehabilitation exercise assessment with cost-aware "
                "feature acquisition.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="Apache 2.0",
    packages=[
        package for package in find_packages()
        if package.startswith("rehab_assess")
    ],
    package_data={"rehab_assess": ["feedback_templates.yaml"]},
    zip_safe=False,
    install_requires=[
        "flax",
        "jax>=0.4.1",
        "jaxlib>=0.4.1",
        "numpy",
        "pandas",
        "pyyaml",
        "scikit-learn>=0.22",
    ],
    extras_require={
        "test": ["pytest"],
    },
    entry_points={
        "console_scripts": ["rehab-assess=rehab_assess.cli:main"],
    },
    dependency_links=[JAX_URL],
    python_requires=">=3.8",
    classifiers=[
        "Intended Audience :: Science/Research",
        "Intended Audience :: Healthcare Industry",
        "License :: OSI Approved :: Apache Software License",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Topic :: Scientific/Engineering :: Medical Science Apps.",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
)
