"""Cargo text standardization, EDI-driven dwell-time prediction and yard relocation simulation."""

__version__ = "0.1.0"
