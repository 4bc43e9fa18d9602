"""Command-line entry point."""

from .app import build_parser, main, resolve_config, run

__all__ = ["build_parser", "main", "resolve_config", "run"]
