"""Build a multilayer standoff corpus (PAULA XML, LAULA XML) from EpiDoc TEI editions of Greek texts."""

__version__ = "0.1.0"
