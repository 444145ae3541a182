"""Desk-scale online test-time adaptation laboratory."""

__version__ = "0.1.0"
