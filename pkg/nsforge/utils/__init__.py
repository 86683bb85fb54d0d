"""
Utilities for nsforge
"""

from .serializer import ReportSerializer
from .presets import PresetManager
from .events import EventManager

__all__ = ['ReportSerializer', 'PresetManager', 'EventManager']
