"""Pool-mining incentive game: block reward mechanisms, best responses and a seeded simulator."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.0.0"
