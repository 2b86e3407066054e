"""HTTP service, journaled round store, config, and the CLI."""

from .api import attach_run_report, create_app
from .config import ServiceConfig
from .store import RoundStore

__all__ = ["create_app", "attach_run_report", "ServiceConfig", "RoundStore"]
