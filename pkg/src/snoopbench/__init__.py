"""Leakage-controlled harness for embedding-level test snooping experiments."""

__version__ = "0.1.0"
