import importlib

from setuptools import setup

spec = importlib.util.spec_from_file_location("version", "pdcspy/version.py")
version_module = importlib.util.module_from_spec(spec)
spec.loader.exec_module(version_module)

packages = ["pdcspy", "pdcspy.providers"]

package_data = {"": ["*"]}

install_requires = [
    "numpy>=1.22",
    "scipy>=1.10",
    "thewalrus",
    "pydantic>=2,<3",
    "tqdm",
    "tomli; python_version < '3.11'",
]

setup_kwargs = {
    "name": "pdcspy",
    "version": version_module.VERSION,
    "description": "Quantum noise of parametrically driven cavity solitons in Kerr microresonators",
    "long_description": open("README.md").read(),
    "long_description_content_type": "text/markdown",
    "author": "pdcspy developers",
    "author_email": None,
    "maintainer": None,
    "maintainer_email": None,
    "url": None,
    "packages": packages,
    "package_data": package_data,
    "install_requires": install_requires,
    "entry_points": {"console_scripts": ["pdcspy = pdcspy.cli:main"]},
    "python_requires": ">=3.10",
}


setup(**setup_kwargs)
