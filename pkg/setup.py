import os
from setuptools import setup, find_packages


def readme(filename):
    full_path = os.path.join(os.path.dirname(__file__), filename)
    with open(full_path, 'r') as file:
        return file.read()


setup(
    name="ua_matrix_solvents",
    version="0.1.1",
    packages=find_packages(),
    include_package_data=True,
    package_data={
        "ua_matrix_solvents": [
            "report_template.txt", "tests/fixtures/*.json"],
    },
    long_description=readme("README.md"),
    long_description_content_type='text/markdown',
    license="MIT",
    description=(
        "Computes Jordan chains, standard pairs, solvents, bisolvents and"
        " right pencil factors of regular matrix polynomials."),
    python_requires=">=3.8",
    install_requires=[
        "numpy",
        "scipy",
        "jinja2",
    ],
)
