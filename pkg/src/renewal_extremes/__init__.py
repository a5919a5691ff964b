"""Extremes of observations collected at renewal times: simulation, limit
laws and Monte Carlo verification."""

__version__ = "0.1.0"
