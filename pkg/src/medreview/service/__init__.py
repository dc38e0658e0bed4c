"""HTTP service and file-backed persistence."""

from .app import create_app
from .storage import Store

__all__ = ["Store", "create_app"]
