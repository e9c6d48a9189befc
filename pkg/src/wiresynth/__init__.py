"""Wiresynth: parametric primitive scenes, wireframe renders, token codec,
reconstruction export, and the evaluation harness around them."""

__version__ = "0.1.0"
