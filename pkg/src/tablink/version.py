"""Version identifiers. FORMAT_VERSION covers every on-disk artifact (records,
edges, closure, index manifest, annotations); bump it on any format change."""

__version__ = "0.1.0"
FORMAT_VERSION = 1
