"""Temperwise: tempered posterior predictives, distances and tau selection."""

__version__ = "1.0.0"
