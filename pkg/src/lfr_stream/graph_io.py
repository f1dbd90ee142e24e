"""Text and binary file formats for degree sequences, graphs, assignments and swap traces.

Binary files start with a 4-byte magic and a little-endian u16 version,
followed by counts and u64 payload. Text files hold one record per line,
tab separated, node ids 0-based. ``-`` as a path means stdin or stdout.
"""

import io
import logging
import sys
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from lfr_stream.community_assign import CommunityAssignment
from lfr_stream.edge_swap import as_edge_array, as_swap_array, check_edge_list
from lfr_stream.errors import ValidationError

logger = logging.getLogger(__name__)

Format = Literal["text", "bin"]
FORMATS: tuple[str, ...] = ("text", "bin")

GRAPH_MAGIC = b"EMGR"
DEGREE_MAGIC = b"EMDS"
VERSION = 1

_GRAPH_HEADER = np.dtype([("magic", "S4"), ("version", "<u2"), ("n", "<u8"), ("m", "<u8")])
_DEGREE_HEADER = np.dtype([("magic", "S4"), ("version", "<u2"), ("n", "<u8")])


@dataclass(frozen=True)
class GraphFileHeader:
    n: int
    m: int
    version: int = VERSION

    def to_bytes(self) -> bytes:
        header = np.zeros(1, dtype=_GRAPH_HEADER)
        header[0] = (GRAPH_MAGIC, self.version, self.n, self.m)
        return header.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "GraphFileHeader":
        if len(data) < _GRAPH_HEADER.itemsize:
            raise ValidationError("graph file is shorter than its header")
        header = np.frombuffer(data, dtype=_GRAPH_HEADER, count=1)[0]
        if bytes(header["magic"]) != GRAPH_MAGIC:
            raise ValidationError(f"bad graph magic {bytes(header['magic'])!r}, expected {GRAPH_MAGIC!r}")
        if int(header["version"]) != VERSION:
            raise ValidationError(f"unsupported graph file version {int(header['version'])}")
        return cls(n=int(header["n"]), m=int(header["m"]), version=int(header["version"]))


# ---------------------------------------------------------------------------
# Raw byte access
# ---------------------------------------------------------------------------

def read_bytes(path: str | Path) -> bytes:
    if str(path) == "-":
        return sys.stdin.buffer.read()
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e.strerror or e}") from e


def write_bytes(path: str | Path, data: bytes) -> None:
    if str(path) == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    Path(path).write_bytes(data)
    logger.debug("wrote %d bytes to %s", len(data), path)


def _load_text(data: bytes, columns: int, what: str) -> np.ndarray:
    if not data.strip():
        return np.empty((0, columns), dtype=np.int64)
    try:
        arr = np.loadtxt(io.BytesIO(data), dtype=np.int64, ndmin=2)
    except ValueError as e:
        raise ValidationError(f"malformed {what} file: {e}") from e
    if arr.shape[1] != columns:
        raise ValidationError(f"{what} file must have {columns} column(s) per line, got {arr.shape[1]}")
    if arr.size and arr.min() < 0:
        raise ValidationError(f"{what} file contains negative values")
    return arr


def _dump_text(rows: np.ndarray) -> bytes:
    buf = io.BytesIO()
    if rows.size:
        np.savetxt(buf, rows, fmt="%d", delimiter="\t")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Degree sequences
# ---------------------------------------------------------------------------

def encode_degrees(degrees: np.ndarray | Sequence[int], fmt: Format = "text") -> bytes:
    arr = np.asarray(degrees, dtype=np.int64).reshape(-1)
    if arr.size and arr.min() < 0:
        raise ValidationError("degrees must be non-negative")
    if fmt == "text":
        return _dump_text(arr.reshape(-1, 1))
    header = np.zeros(1, dtype=_DEGREE_HEADER)
    header[0] = (DEGREE_MAGIC, VERSION, arr.size)
    return header.tobytes() + arr.astype("<u8").tobytes()


def decode_degrees(data: bytes, fmt: Format | None = None) -> np.ndarray:
    """Parse a degree file; ``fmt=None`` picks binary when the magic matches."""
    if fmt == "bin" or (fmt is None and data[:4] == DEGREE_MAGIC):
        if len(data) < _DEGREE_HEADER.itemsize:
            raise ValidationError("degree file is shorter than its header")
        header = np.frombuffer(data, dtype=_DEGREE_HEADER, count=1)[0]
        if bytes(header["magic"]) != DEGREE_MAGIC:
            raise ValidationError(f"bad degree magic {bytes(header['magic'])!r}, expected {DEGREE_MAGIC!r}")
        if int(header["version"]) != VERSION:
            raise ValidationError(f"unsupported degree file version {int(header['version'])}")
        n = int(header["n"])
        body = data[_DEGREE_HEADER.itemsize:]
        if len(body) != 8 * n:
            raise ValidationError(f"degree file announces {n} values but holds {len(body) // 8}")
        return np.frombuffer(body, dtype="<u8").astype(np.int64)
    return _load_text(data, 1, "degree").ravel()


def write_degrees(path: str | Path, degrees: np.ndarray | Sequence[int], fmt: Format = "text") -> None:
    write_bytes(path, encode_degrees(degrees, fmt))


def read_degrees(path: str | Path, fmt: Format | None = None) -> np.ndarray:
    return decode_degrees(read_bytes(path), fmt)


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------

def encode_graph(edges: np.ndarray | Sequence[Sequence[int]], n: int | None = None, fmt: Format = "text") -> bytes:
    """Serialize a sorted edge list; ``n`` defaults to the largest id + 1."""
    arr = as_edge_array(edges)
    check_edge_list(arr, simple=False)
    top = int(arr.max()) + 1 if len(arr) else 0
    n = top if n is None else n
    if n < top:
        raise ValidationError(f"edge list references node {top - 1} but n={n}")
    if fmt == "text":
        return _dump_text(arr)
    return GraphFileHeader(n, len(arr)).to_bytes() + arr.astype("<u8").tobytes()


def decode_graph(data: bytes, fmt: Format | None = None) -> tuple[np.ndarray, int]:
    """Parse a graph file into ``(edges, n)``; the ordering is verified."""
    if fmt == "bin" or (fmt is None and data[:4] == GRAPH_MAGIC):
        header = GraphFileHeader.from_bytes(data)
        body = data[_GRAPH_HEADER.itemsize:]
        if len(body) != 16 * header.m:
            raise ValidationError(f"graph file announces {header.m} edges but holds {len(body) // 16}")
        edges = np.frombuffer(body, dtype="<u8").astype(np.int64).reshape(-1, 2)
        n = header.n
        if len(edges) and int(edges.max()) >= n:
            raise ValidationError(f"edge references node {int(edges.max())} but n={n}")
    else:
        edges = _load_text(data, 2, "graph")
        n = int(edges.max()) + 1 if len(edges) else 0
    check_edge_list(edges, simple=False)
    return edges, n


def write_graph(
    path: str | Path, edges: np.ndarray | Sequence[Sequence[int]], n: int | None = None, fmt: Format = "text"
) -> None:
    write_bytes(path, encode_graph(edges, n, fmt))


def read_graph(path: str | Path, fmt: Format | None = None) -> tuple[np.ndarray, int]:
    return decode_graph(read_bytes(path), fmt)


# ---------------------------------------------------------------------------
# Community assignments and swap traces
# ---------------------------------------------------------------------------

def encode_assignment(assignment: CommunityAssignment) -> bytes:
    return _dump_text(np.stack([assignment.nodes, assignment.communities], axis=1))


def write_assignment(path: str | Path, assignment: CommunityAssignment) -> None:
    write_bytes(path, encode_assignment(assignment))


def read_assignment(path: str | Path, n_nodes: int | None = None) -> CommunityAssignment:
    rows = _load_text(read_bytes(path), 2, "assignment")
    return CommunityAssignment.from_pairs(rows[:, 0], rows[:, 1], n_nodes=n_nodes)


def write_swap_trace(path: str | Path, swaps: np.ndarray) -> None:
    """One ``a<TAB>b<TAB>d`` line per swap."""
    arr = np.asarray(swaps, dtype=np.int64).reshape(-1, 3)
    write_bytes(path, _dump_text(arr))


def read_swap_trace(path: str | Path, m: int) -> np.ndarray:
    rows = _load_text(read_bytes(path), 3, "swap trace")
    return as_swap_array(rows, m)
