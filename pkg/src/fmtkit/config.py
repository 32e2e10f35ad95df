"""Process-wide resource caps.

``FMTKIT_CAP`` in the environment overrides the default node cap.
"""
from __future__ import annotations

import os

DEFAULT_CAP = 10**6


def default_cap() -> int:
    raw = os.environ.get("FMTKIT_CAP")
    if raw is None:
        return DEFAULT_CAP
    value = int(raw)
    if value <= 0:
        raise ValueError("FMTKIT_CAP must be positive")
    return value
