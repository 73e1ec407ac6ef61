"""Exception types shared across the package."""

from __future__ import annotations


class MvfuzzError(Exception):
    """Base class for every error raised by this package."""


class DataError(MvfuzzError):
    """Invalid data: bad file contents, shape mismatches, missing labels."""


class ConfigError(MvfuzzError):
    """Invalid configuration value or experiment description."""


class DegenerateClusterError(MvfuzzError):
    """A cluster received zero total membership weight.

    Carries the offending cluster indices so callers can re-seed the
    corresponding centers and continue.
    """

    def __init__(self, clusters: list[int]):
        self.clusters = list(clusters)
        nice = ", ".join(str(c) for c in self.clusters)
        super().__init__(f"cluster(s) {nice} have zero membership weight")
