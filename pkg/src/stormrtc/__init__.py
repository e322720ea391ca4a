"""Predictive real-time control of a stormwater detention pond."""

__version__ = "0.1.0"
