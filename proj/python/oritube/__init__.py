"""Origami tube actuator toolkit (compiled core)."""

import os
from pathlib import Path

_bundled = Path(__file__).parent / "data"
if _bundled.is_dir():
    os.environ.setdefault("ORITUBE_DATA_DIR", str(_bundled))

from ._core import *  # noqa: E402,F401,F403
from ._core import OritubeError, RESIN  # noqa: E402,F401
