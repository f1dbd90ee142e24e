"""Environment-driven defaults."""

import os
import re
import tempfile

from lfr_stream.errors import ValidationError

_SIZE_RE = re.compile(r"^\s*(\d+)\s*(B|KIB|MIB|GIB|KB|MB|GB|K|M|G)?\s*$", re.IGNORECASE)
_SIZE_UNITS = {
    None: 1,
    "B": 1,
    "K": 1 << 10,
    "KB": 1 << 10,
    "KIB": 1 << 10,
    "M": 1 << 20,
    "MB": 1 << 20,
    "MIB": 1 << 20,
    "G": 1 << 30,
    "GB": 1 << 30,
    "GIB": 1 << 30,
}


def parse_size(text: str) -> int:
    """Parse a byte count such as ``4096``, ``512KiB`` or ``256MiB``.

    Args:
        text: Size literal, case-insensitive binary suffix optional

    Returns:
        Number of bytes
    """
    match = _SIZE_RE.match(text)
    if not match:
        raise ValidationError(f"invalid size: {text!r}")
    unit = match.group(2).upper() if match.group(2) else None
    return int(match.group(1)) * _SIZE_UNITS[unit]


MEMORY_BUDGET = parse_size(os.getenv("LFR_STREAM_MEMORY_BUDGET", "256MiB"))
SPILL_DIR = os.getenv("LFR_STREAM_SPILL_DIR") or tempfile.gettempdir()
MAX_ROUNDS = int(os.getenv("LFR_STREAM_MAX_ROUNDS", "64"))
INMEMORY_SWAP_LIMIT = int(os.getenv("LFR_STREAM_INMEMORY_SWAP_LIMIT", "10000"))
LOG_LEVEL = os.getenv("LFR_STREAM_LOG_LEVEL", "WARNING")
