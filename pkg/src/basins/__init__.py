"""Iteration of meromorphic functions with two completely invariant basins."""

__version__ = "0.1.0"
