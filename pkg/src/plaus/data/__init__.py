"""Bundled demonstration datasets."""
