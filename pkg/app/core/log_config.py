from __future__ import annotations

import logging
from typing import Optional

from app.core.settings import get_settings

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_configured = False


def configure_logging(level: Optional[str] = None) -> None:
    """Install one stderr handler on the root logger (idempotent)."""
    global _configured
    lvl = (level or get_settings().log_level).upper()
    root = logging.getLogger()
    if not _configured:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        root.addHandler(handler)
        _configured = True
    root.setLevel(lvl)
