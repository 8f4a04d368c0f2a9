"""End-to-end mmWave link simulator with IRS and amplify-and-forward relays."""

__version__ = "0.1.0"

from .util import ConfigError, InvariantError  # noqa: F401
