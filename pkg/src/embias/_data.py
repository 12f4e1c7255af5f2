"""Locate bundled data files, honoring the EMBIAS_DATA_DIR override."""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path


def data_root():
    """Directory holding suites/, templates/, and debias/ data.

    Defaults to the files shipped inside the package; setting EMBIAS_DATA_DIR
    points every builtin lookup at an alternative tree with the same layout,
    so word lists can be edited without touching the install.
    """
    env = os.environ.get("EMBIAS_DATA_DIR")
    if env:
        return Path(env)
    return resources.files("embias") / "data"


def read_data_text(relative: str) -> str:
    node = data_root()
    for part in relative.split("/"):
        node = node / part
    try:
        return node.read_text(encoding="utf-8")
    except (FileNotFoundError, OSError) as exc:
        raise FileNotFoundError(f"bundled data file {relative!r} not found") from exc
