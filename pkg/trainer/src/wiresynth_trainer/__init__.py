"""Toy image-to-sequence trainer over wiresynth datasets."""

__version__ = "0.1.0"
