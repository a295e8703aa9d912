"""Simulator for spin-Hall MTJ winner-take-all columns."""

__version__ = "0.1.0"
