from setuptools import setup, find_packages

setup(
    name="sentigan-forecast",
    version="0.1",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"src": ["config/*.yaml"]},
    install_requires=[
        "python-dotenv",
        "aiohttp",
        "pyyaml",
        "tenacity",
        "typer",
        "pandas",
        "python-dateutil",
        "numpy",
        "matplotlib",
    ],
    entry_points={
        "console_scripts": ["sentigan=src.cli:app"],
    },
)
