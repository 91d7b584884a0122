"""Bundled group definitions."""

from importlib import resources

NAMES = ("trivial", "cyclic3", "abelian", "heisenberg", "modular")


def path(name):
    return resources.files(__name__) / f"{name}.group"


def load(name):
    from ..group import GroupDefinition
    return GroupDefinition.from_text(path(name).read_text(encoding="utf-8"))
