#!/usr/bin/env python3
"""
CSL噪声谱数值平台 - 安装配置

文档版本：V1.0
创建日期：2026-10-18
依据文档：《SPEC_FULL.md》B.0 仓库结构
用途：项目打包、分发、依赖管理
"""

from pathlib import Path

from setuptools import find_packages, setup

# 读取README文件
this_directory = Path(__file__).parent
long_description = (this_directory / "README.md").read_text(encoding="utf-8")


def read_requirements(name: str) -> list:
    """读取依赖文件，忽略注释与 -r 引用"""
    path = this_directory / name
    if not path.exists():
        return []
    requirements = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if line and not line.startswith("-"):
                requirements.append(line)
    return requirements


setup(
    name="csl-spectra",
    version="1.0.0",
    author="CSL Spectra Development Team",
    description="CSL collapse-model noise spectra for a driven optomechanical cavity",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    py_modules=["main"],
    include_package_data=True,
    data_files=[("config", ["config/app_config.json"]), ("config/presets", [str(p) for p in sorted(Path("config/presets").glob("*.yaml"))])],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.9",
    install_requires=read_requirements("requirements.txt"),
    extras_require={
        "dev": read_requirements("requirements-dev.txt"),
        "test": [
            "pytest>=7.4.0",
            "pytest-cov>=4.1.0",
            "pytest-mock>=3.11.0",
            "pytest-xdist>=3.3.0",
            "SymPy>=1.12.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "csl-spectra=main:main",
        ],
    },
    keywords=[
        "collapse-models",
        "csl",
        "optomechanics",
        "noise-spectrum",
        "langevin",
        "monte-carlo",
    ],
    zip_safe=False,
    platforms=["any"],
)
