"""Streaming generators for LFR community benchmarks and fixed-degree random graphs."""

__version__ = "0.1.0"
