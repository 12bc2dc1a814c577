"""Bundled scenario files (TOML), one per reproduced figure configuration."""
