from setuptools import setup, find_packages

setup(
    packages=find_packages(include=["dbsom", "dbsom.*"]),
    package_data={"dbsom": ["schema_files/*.schema.json"]},
)
