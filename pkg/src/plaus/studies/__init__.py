"""Bundled coverage-study specifications (JSON)."""
