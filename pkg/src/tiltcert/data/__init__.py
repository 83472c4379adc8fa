"""Bundled triangulation fixtures in the native text format."""

from importlib import resources

from ..triangulation import parse


def fixture_text(name):
    """Raw text of a bundled fixture, e.g. 'fig8'."""
    if not name.endswith(".tri"):
        name += ".tri"
    return resources.files(__package__).joinpath(name).read_text()


def load(name):
    """Parse a bundled fixture into an IdealTriangulation."""
    return parse(fixture_text(name))


def names():
    """Sorted names of all bundled fixtures."""
    out = []
    for entry in resources.files(__package__).iterdir():
        if entry.name.endswith(".tri"):
            out.append(entry.name[:-4])
    return sorted(out)
