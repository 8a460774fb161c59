"""CSV export and a versioned binary cache for count series.

Binary layout (all integers little-endian)::

    magic   b"PTNQ"
    u16     format version
    u32 d, u32 a, u8 minus, u8 kind (0 congruence, 1 distinct)
    u64     n_max
    n_max+1 records: u32 byte length, magnitude bytes

Counts are nonnegative so no sign byte is stored.
"""

from __future__ import annotations

import csv
import io
import struct
from pathlib import Path
from typing import BinaryIO, Iterable, TextIO

from .errors import PartineqError
from .exact import CountSeries, FamilyConfig, Kind

MAGIC = b"PTNQ"
VERSION = 1
_HEADER = struct.Struct("<4sHIIBBQ")
_LEN = struct.Struct("<I")
_KIND_CODES = {Kind.CONGRUENCE: 0, Kind.DISTINCT: 1}

CSV_HEADER = ("d", "a", "minus", "kind", "n", "count")


class CacheFormatError(PartineqError):
    pass


def write_csv(series: CountSeries, out: TextIO) -> None:
    cfg = series.config
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    minus = "true" if cfg.minus else "false"
    for n, value in enumerate(series.values):
        w.writerow((cfg.d, cfg.a, minus, cfg.kind.value, n, value))


def csv_text(series: CountSeries) -> str:
    buf = io.StringIO()
    write_csv(series, buf)
    return buf.getvalue()


def encode_ints(values: Iterable[int]) -> bytes:
    chunks = []
    for v in values:
        if v < 0:
            raise ValueError("only nonnegative integers are stored")
        raw = v.to_bytes((v.bit_length() + 7) // 8, "little")
        chunks.append(_LEN.pack(len(raw)))
        chunks.append(raw)
    return b"".join(chunks)


def decode_ints(buf: bytes, count: int, offset: int = 0) -> tuple[list[int], int]:
    out = []
    for _ in range(count):
        if offset + _LEN.size > len(buf):
            raise CacheFormatError("truncated length prefix")
        (length,) = _LEN.unpack_from(buf, offset)
        offset += _LEN.size
        if offset + length > len(buf):
            raise CacheFormatError("truncated magnitude")
        out.append(int.from_bytes(buf[offset:offset + length], "little"))
        offset += length
    return out, offset


def dumps(series: CountSeries) -> bytes:
    cfg = series.config
    head = _HEADER.pack(MAGIC, VERSION, cfg.d, cfg.a, int(cfg.minus),
                        _KIND_CODES[cfg.kind], series.n_max)
    return head + encode_ints(series.values)


def loads(buf: bytes) -> CountSeries:
    if len(buf) < _HEADER.size:
        raise CacheFormatError("file shorter than header")
    magic, version, d, a, minus, kind, n_max = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise CacheFormatError("bad magic")
    if version != VERSION:
        raise CacheFormatError(f"unsupported cache version {version}")
    kinds = {v: k for k, v in _KIND_CODES.items()}
    if kind not in kinds or minus not in (0, 1):
        raise CacheFormatError("bad family header")
    values, end = decode_ints(buf, n_max + 1, _HEADER.size)
    if end != len(buf):
        raise CacheFormatError("trailing bytes after last record")
    return CountSeries(FamilyConfig(d, a, bool(minus), kinds[kind]), tuple(values))


def save(series: CountSeries, path) -> None:
    Path(path).write_bytes(dumps(series))


def load(path) -> CountSeries:
    return loads(Path(path).read_bytes())


def dump(series: CountSeries, fh: BinaryIO) -> None:
    fh.write(dumps(series))
