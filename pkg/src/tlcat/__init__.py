"""Temperley-Lieb representations built from the F-symbols of a monoidal system."""

__version__ = "0.1.0"
