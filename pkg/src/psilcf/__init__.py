"""Toolkit for psi-locally constant functions and heavy-tailed large deviations."""

__version__ = "0.1.0"
