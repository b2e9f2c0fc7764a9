"""Exceptional points and coherent perfect absorption in a two-emitter cavity."""

__version__ = "0.1.0"
