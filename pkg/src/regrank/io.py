"""Dataset ingestion, normalized rating tables, and binary graph snapshots."""

from __future__ import annotations

import json
import math
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
import scipy.sparse as sp

from regrank.projection import ProjectedGraph


class IngestError(ValueError):
    pass


class SnapshotError(ValueError):
    pass


FORMATS = {
    # name: (delimiter, number of fields, default scale)
    "movielens-100k": ("\t", 4, (1.0, 5.0, 1.0)),
    "movielens-1m": ("::", 4, (1.0, 5.0, 1.0)),
    "filmtrust": (None, 3, (1.0, 4.0, 0.5)),
    "generic-tsv": ("\t", 3, None),
}


@dataclass(frozen=True)
class DatasetDescriptor:
    format: str
    path: Path
    scale: tuple[float, float, float] | None = None
    delimiter: str | None = None

    def __post_init__(self):
        if self.format not in FORMATS:
            raise IngestError(f"unknown format {self.format!r}; expected one of {', '.join(FORMATS)}")

    @property
    def resolved_scale(self):
        return self.scale if self.scale is not None else FORMATS[self.format][2]

    @property
    def resolved_delimiter(self):
        return self.delimiter if self.delimiter is not None else FORMATS[self.format][0]


def _label(tok: str):
    return int(tok) if tok.lstrip("-").isdigit() else tok


def _on_scale(v: float, scale) -> bool:
    lo, hi, step = scale
    if not (lo - 1e-9 <= v <= hi + 1e-9):
        return False
    k = (v - lo) / step
    return math.isclose(k, round(k), abs_tol=1e-9)


def ingest(desc: DatasetDescriptor) -> pd.DataFrame:
    """Parse a rating file into a ``user, item, rating`` frame sorted by user then item.

    Malformed lines, off-scale values and repeated (user, item) pairs raise
    :class:`IngestError` naming the offending line numbers.
    """
    path = Path(desc.path)
    if not path.exists():
        raise IngestError(f"{path}: no such file")
    delim = desc.resolved_delimiter
    min_fields = 3
    scale = desc.resolved_scale
    users, items, values = [], [], []
    first_line: dict[tuple, int] = {}
    with path.open(encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(delim) if delim is not None else line.split()
            if desc.format == "generic-tsv" and lineno == 1 and fields[:3] == ["user", "item", "rating"]:
                continue
            if len(fields) < min_fields:
                raise IngestError(f"{path}:{lineno}: expected at least {min_fields} fields, got {len(fields)}")
            try:
                value = float(fields[2])
            except ValueError:
                raise IngestError(f"{path}:{lineno}: rating {fields[2]!r} is not a number") from None
            if scale is not None and not _on_scale(value, scale):
                raise IngestError(f"{path}:{lineno}: rating {value} outside scale {scale}")
            u, i = _label(fields[0].strip()), _label(fields[1].strip())
            key = (u, i)
            if key in first_line:
                raise IngestError(
                    f"{path}:{lineno}: duplicate rating for user {u!r}, item {i!r} "
                    f"(first seen on line {first_line[key]})"
                )
            first_line[key] = lineno
            users.append(u)
            items.append(i)
            values.append(value)
    frame = pd.DataFrame({"user": users, "item": items, "rating": values})
    return canonical(frame)


def canonical(frame: pd.DataFrame) -> pd.DataFrame:
    return frame.sort_values(["user", "item"], kind="stable").reset_index(drop=True)


def write_ratings(frame: pd.DataFrame, path) -> None:
    canonical(frame).to_csv(path, sep="\t", index=False, columns=["user", "item", "rating"])


def read_ratings(path) -> pd.DataFrame:
    return ingest(DatasetDescriptor("generic-tsv", Path(path)))


# -- snapshots ----------------------------------------------------------------
#
# layout (little endian):
#   magic b"RGRKSNAP" | u32 version | u32 section count
#   per section: 16-byte name | u64 offset | u64 length | u32 crc32
#   u32 crc32 of everything above
#   section payloads
# sections: meta (JSON), indptr (i64), indices (i64), data (f64), pref_winner (i64), pref_loser (i64)

MAGIC = b"RGRKSNAP"
VERSION = 1
_ENTRY = struct.Struct("<16sQQI")
_HEAD = struct.Struct("<8sII")


def save_graph(path, graph: ProjectedGraph, extra: dict | None = None) -> None:
    m = graph.matrix
    meta = {
        "variant": graph.variant,
        "kinds": list(graph.kinds),
        "users": list(graph.users),
        "items": list(graph.items),
        "shape": list(m.shape),
        "counts": {k: graph.size(k) for k in graph.kinds},
        "extra": extra or {},
    }
    sections = [
        ("meta", json.dumps(meta, sort_keys=True).encode()),
        ("indptr", np.asarray(m.indptr, dtype="<i8").tobytes()),
        ("indices", np.asarray(m.indices, dtype="<i8").tobytes()),
        ("data", np.asarray(m.data, dtype="<f8").tobytes()),
        ("pref_winner", np.asarray(graph.pref_winner, dtype="<i8").tobytes()),
        ("pref_loser", np.asarray(graph.pref_loser, dtype="<i8").tobytes()),
    ]
    head_len = _HEAD.size + _ENTRY.size * len(sections) + 4
    index = bytearray(_HEAD.pack(MAGIC, VERSION, len(sections)))
    offset = head_len
    for name, payload in sections:
        index += _ENTRY.pack(name.encode().ljust(16, b"\0"), offset, len(payload), zlib.crc32(payload))
        offset += len(payload)
    index += struct.pack("<I", zlib.crc32(bytes(index)))
    with open(path, "wb") as fh:
        fh.write(index)
        for _, payload in sections:
            fh.write(payload)


def load_snapshot(path) -> tuple[ProjectedGraph, dict]:
    """Read a snapshot, verifying version and every checksum before building the graph."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEAD.size or blob[:8] != MAGIC:
        raise SnapshotError(f"{path}: not a graph snapshot")
    _, version, n = _HEAD.unpack_from(blob, 0)
    if version != VERSION:
        raise SnapshotError(f"{path}: snapshot version {version}, this build reads {VERSION}")
    head_len = _HEAD.size + _ENTRY.size * n + 4
    if len(blob) < head_len:
        raise SnapshotError(f"{path}: truncated index")
    (crc,) = struct.unpack_from("<I", blob, head_len - 4)
    if zlib.crc32(blob[: head_len - 4]) != crc:
        raise SnapshotError(f"{path}: index checksum mismatch")
    payloads = {}
    for k in range(n):
        raw_name, offset, length, crc = _ENTRY.unpack_from(blob, _HEAD.size + k * _ENTRY.size)
        name = raw_name.rstrip(b"\0").decode()
        payload = blob[offset : offset + length]
        if len(payload) != length or zlib.crc32(payload) != crc:
            raise SnapshotError(f"{path}: checksum mismatch in section {name!r}")
        payloads[name] = payload

    meta = json.loads(payloads["meta"])
    shape = tuple(meta["shape"])
    matrix = sp.csr_matrix(
        (
            np.frombuffer(payloads["data"], dtype="<f8").astype(np.float64),
            np.frombuffer(payloads["indices"], dtype="<i8").astype(np.int64),
            np.frombuffer(payloads["indptr"], dtype="<i8").astype(np.int64),
        ),
        shape=shape,
    )
    graph = ProjectedGraph(
        variant=meta["variant"],
        kinds=tuple(meta["kinds"]),
        users=tuple(meta["users"]),
        items=tuple(meta["items"]),
        matrix=matrix,
        pref_winner=np.frombuffer(payloads["pref_winner"], dtype="<i8").astype(np.int64),
        pref_loser=np.frombuffer(payloads["pref_loser"], dtype="<i8").astype(np.int64),
    )
    if graph.n_nodes != sum(graph.size(k) for k in graph.kinds):
        raise SnapshotError(f"{path}: roster does not match matrix shape")
    return graph, meta["extra"]


def load_graph(path) -> ProjectedGraph:
    return load_snapshot(path)[0]
