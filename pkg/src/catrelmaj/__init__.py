"""Catalytic relative majorization between pairs of finite distributions."""

__version__ = "0.1.0"
