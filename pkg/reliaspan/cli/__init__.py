"""
ReliaSpan - CLI Package Initialization
"""
from reliaspan.cli.commands import build_parser, dispatch

__all__ = ["build_parser", "dispatch"]
