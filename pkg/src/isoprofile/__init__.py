"""Isoperimetric profiles, controlled Følner pairs and return probabilities
on concrete amenable groups."""

__version__ = "0.1.0"
