"""Stabilizer simulation, fault-tolerance verification and Monte Carlo benchmarks for small CSS codes."""

__version__ = "0.1.0"
