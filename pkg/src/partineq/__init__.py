"""Exact counting, explicit asymptotics and threshold certification for
Alder-Andrews type partition inequalities."""

__version__ = "0.1.0"
