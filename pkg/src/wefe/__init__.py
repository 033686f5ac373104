"""Numerical verification engine for the vacuum weighted Einstein field
equation on smooth metric measure spacetimes."""

__version__ = "0.1.0"
