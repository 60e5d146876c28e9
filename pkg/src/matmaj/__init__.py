"""Majorization and matrix majorization: one-shot decisions, monotones,
asymptotic and catalytic criteria, and witness construction."""

__version__ = "0.1.0"
