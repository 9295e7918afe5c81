"""Bundled problem, representation, and training presets (JSON data files)."""
