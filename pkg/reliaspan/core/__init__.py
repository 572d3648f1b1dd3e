"""
ReliaSpan - Core Module Initialization
"""
from reliaspan.core.config import get_settings, Settings

__all__ = ["get_settings", "Settings"]
