"""Equivariant frame-based message passing with a verification-first test lab."""

__version__ = "0.1.0"
