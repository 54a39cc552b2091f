"""Networked DC-servo speed loop: delay estimation, adaptive Smith prediction,
PI control, and delay-dependent stability analysis."""

__version__ = "0.1.0"
