"""Command-line driver; see ``freetransport --help``."""

from .main import main, run

__all__ = ["main", "run"]
