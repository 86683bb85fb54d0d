"""
Run event bus: iteration milestones and harness actions
"""

import itertools
import logging
from typing import Any, Callable, Dict, List, Optional

logger = logging.getLogger(__name__)


class Event:
    """Event object carrying run data

    Events are numbered rather than timestamped, so anything derived from
    them is reproducible.
    """

    _counter = itertools.count(1)

    def __init__(self, event_type: str, source: Any = None, data: Optional[Dict[str, Any]] = None):
        self.event_type = event_type
        self.source = source
        self.data = data or {}
        self.sequence = next(Event._counter)

    def __repr__(self) -> str:
        return f"Event({self.event_type!r}, #{self.sequence})"


class EventManager:
    """Dispatches run events, global handlers first, then handlers by name in registration order"""

    def __init__(self):
        self._event_handlers: Dict[str, List[Callable]] = {}
        self._global_handlers: List[Callable] = []

    def register_event(self, event_name: str, handler: Callable) -> str:
        """Register a handler; returns an id usable in logs"""
        if not callable(handler):
            raise ValueError("Handler must be callable")
        self._event_handlers.setdefault(event_name, []).append(handler)
        return f"{event_name}_{id(handler)}"

    def register_global_handler(self, handler: Callable) -> str:
        """Register a handler that receives every event"""
        if not callable(handler):
            raise ValueError("Handler must be callable")
        self._global_handlers.append(handler)
        return f"global_{id(handler)}"

    def emit_event(self, event_name: str, source: Any = None, data: Optional[Dict[str, Any]] = None) -> Event:
        event = Event(event_name, source, data)
        for handler in self._global_handlers + self._event_handlers.get(event_name, []):
            try:
                handler(event)
            except Exception:
                # a broken listener never stops the run
                logger.exception("Error in handler for %r", event_name)
        return event

    def remove_event_handler(self, event_name: str, handler: Callable):
        if event_name in self._event_handlers:
            self._event_handlers[event_name] = [h for h in self._event_handlers[event_name] if h != handler]
            if not self._event_handlers[event_name]:
                del self._event_handlers[event_name]

    def remove_global_handler(self, handler: Callable):
        self._global_handlers = [h for h in self._global_handlers if h != handler]

    def get_handler_count(self, event_name: Optional[str] = None) -> int:
        if event_name:
            return len(self._event_handlers.get(event_name, []))
        return sum(len(handlers) for handlers in self._event_handlers.values()) + len(self._global_handlers)


class IterationEvents:
    """Milestones of the iteration driver"""

    RUN_STARTED = "run_started"
    BASE_READY = "base_ready"
    LAMBDA_TRIED = "lambda_tried"
    LAMBDA_SELECTED = "lambda_selected"
    INCREMENT_BUILT = "increment_built"
    STRESS_UPDATED = "stress_updated"
    CHECKS_DONE = "checks_done"
    STEP_SKIPPED = "step_skipped"
    RUN_FINISHED = "run_finished"


class HarnessEvents:
    """Command-line and persistence events"""

    CONFIG_LOADED = "config_loaded"
    REPORT_SAVED = "report_saved"
    FIELD_DUMPED = "field_dumped"
    IMAGE_WRITTEN = "image_written"
    ERROR_OCCURRED = "error_occurred"


event_manager = EventManager()


def on(event_name: str, handler: Callable) -> str:
    """Shortcut to register event handler"""
    return event_manager.register_event(event_name, handler)


def emit(event_name: str, source: Any = None, data: Optional[Dict[str, Any]] = None) -> Event:
    """Shortcut to emit event"""
    return event_manager.emit_event(event_name, source, data)


def off(event_name: str, handler: Callable):
    return event_manager.remove_event_handler(event_name, handler)
