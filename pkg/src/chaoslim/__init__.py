"""Simulation and exact second-order analysis of discrete-chaos processes."""

__version__ = "0.1.0"
