"""Closed-loop O-RAN mobility load balancing testbench."""

__version__ = "0.1.0"
