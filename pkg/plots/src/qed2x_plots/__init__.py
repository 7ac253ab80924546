"""Rendering for qed2x CSV outputs. Consumes only the documented CSV
schemas; performs no simulation."""

__version__ = "0.1.0"
