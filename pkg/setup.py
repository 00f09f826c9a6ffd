#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
QVHedge 项目打包配置

该文件定义了项目的打包配置，包括：
- 项目元数据
- 依赖包列表
- 命令行入口
- 开发依赖

作者: QVHedge 开发团队
版本: 1.0.0
"""

from setuptools import setup, find_packages


# 读取README文件
def read_readme():
    with open("README.md", "r", encoding="utf-8") as fh:
        return fh.read()


# 读取requirements文件
def read_requirements():
    with open("requirements.txt", "r", encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip() and not line.startswith("#")]


setup(
    name="qvhedge",
    version="1.0.0",
    author="QVHedge 开发团队",
    description="Heston 模型下二次变差衍生品的定价与相关性免疫对冲实验",
    long_description=read_readme(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    py_modules=["main"],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Intended Audience :: Financial and Insurance Industry",
        "Topic :: Office/Business :: Financial",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.8",
    install_requires=read_requirements(),
    extras_require={
        "dev": [
            "pytest>=6.0",
            "pytest-qt>=4.0",
            "black>=22.0",
            "flake8>=4.0",
            "mypy>=0.900",
        ],
    },
    entry_points={
        "console_scripts": [
            "qvhedge=main:main",
        ],
    },
    include_package_data=True,
    package_data={
        "": [
            "*.md",
            "*.txt",
        ],
    },
    data_files=[
        ("config", [
            "config/default_experiment.json",
        ]),
    ],
    zip_safe=False,
    keywords=[
        "heston", "quadratic variation", "volatility derivatives", "hedging",
        "monte carlo", "variance swap"
    ],
)
