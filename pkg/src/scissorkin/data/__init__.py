"""Packaged fixtures."""
import json
from importlib import resources


def load_json(name: str) -> dict:
    return json.loads(resources.files(__name__).joinpath(name).read_text())


def fixture_path(name: str):
    return resources.files(__name__).joinpath(name)
