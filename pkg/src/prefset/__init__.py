"""Optimal subset selection under preferences over set properties."""

__version__ = "0.1.0"
