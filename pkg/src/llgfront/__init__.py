"""Stochastic LLG fronts: SPDE solver, collective-coordinate reduction and
alpha-stable statistics of the front position."""

__version__ = "0.1.0"
