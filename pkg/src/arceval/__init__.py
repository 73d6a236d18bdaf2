"""Scenario-based architecture evaluation for foundation-model agents."""

__version__ = "0.1.0"
