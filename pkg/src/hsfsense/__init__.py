"""Joint compressed sensing and beam steering on a binary programmable surface."""

__version__ = "0.1.0"
