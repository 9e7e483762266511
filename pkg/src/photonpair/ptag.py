"""Time-tag file I/O.

Binary PTAG layout, little-endian throughout:

    bytes 0-3   magic "PTAG"
    bytes 4-5   version, u16 (currently 1)
    bytes 6-13  tick duration in femtoseconds, u64
    bytes 14-15 reserved, zero
    then 9-byte records: channel u8 (0 signal / 1 idler), ticks u64

Records are stored in global chronological order (ties: channel 0
first); each channel on its own is therefore non-decreasing, which the
reader enforces.  A plain ``channel,ticks`` CSV is provided for
debugging; it carries no tick metadata.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import DataFormatError
from .timetags import TimeTagStream

MAGIC = b"PTAG"
VERSION = 1
HEADER_SIZE = 16
RECORD_SIZE = 9

_RECORD_DTYPE = np.dtype([("channel", "u1"), ("ticks", "<u8")])
assert _RECORD_DTYPE.itemsize == RECORD_SIZE


def _merged_records(stream: TimeTagStream) -> np.ndarray:
    n_s, n_i = stream.counts()
    rec = np.empty(n_s + n_i, dtype=_RECORD_DTYPE)
    rec["channel"][:n_s] = 0
    rec["channel"][n_s:] = 1
    rec["ticks"][:n_s] = stream.signal_ticks.astype(np.uint64)
    rec["ticks"][n_s:] = stream.idler_ticks.astype(np.uint64)
    order = np.lexsort((rec["channel"], rec["ticks"]))
    return rec[order]


def write_ptag(stream: TimeTagStream, path) -> None:
    tick_fs = round(stream.tick_duration * 1e15)
    header = MAGIC + struct.pack("<HQ", VERSION, tick_fs) + b"\x00\x00"
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(_merged_records(stream).tobytes())


def read_ptag(path) -> TimeTagStream:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < HEADER_SIZE:
        raise DataFormatError("truncated header", byte_offset=len(blob))
    if blob[:4] != MAGIC:
        raise DataFormatError(f"bad magic {blob[:4]!r}", byte_offset=0)
    version, tick_fs = struct.unpack("<HQ", blob[4:14])
    if version != VERSION:
        raise DataFormatError(f"unsupported version {version}", byte_offset=4)
    if tick_fs == 0:
        raise DataFormatError("tick duration must be nonzero", byte_offset=6)
    body = blob[HEADER_SIZE:]
    if len(body) % RECORD_SIZE:
        n_complete = len(body) // RECORD_SIZE
        raise DataFormatError("truncated record",
                              byte_offset=HEADER_SIZE + n_complete * RECORD_SIZE)
    rec = np.frombuffer(body, dtype=_RECORD_DTYPE)
    bad = np.nonzero(rec["channel"] > 1)[0]
    if len(bad):
        raise DataFormatError(f"invalid channel {rec['channel'][bad[0]]}",
                              byte_offset=HEADER_SIZE + int(bad[0]) * RECORD_SIZE)
    if len(rec) and rec["ticks"].max() >= 2 ** 63:
        i = int(np.argmax(rec["ticks"] >= 2 ** 63))
        raise DataFormatError("tick value exceeds supported range",
                              byte_offset=HEADER_SIZE + i * RECORD_SIZE + 1)
    chans = []
    for c in (0, 1):
        idx = np.nonzero(rec["channel"] == c)[0]
        ticks = rec["ticks"][idx].astype(np.int64)
        if len(ticks) > 1:
            drop = np.nonzero(np.diff(ticks) < 0)[0]
            if len(drop):
                off = HEADER_SIZE + int(idx[drop[0] + 1]) * RECORD_SIZE
                raise DataFormatError(f"channel {c} ticks decrease", byte_offset=off)
        chans.append(ticks)
    return TimeTagStream(tick_duration=tick_fs * 1e-15,
                         signal_ticks=chans[0], idler_ticks=chans[1])


def write_csv_tags(stream: TimeTagStream, path) -> None:
    rec = _merged_records(stream)
    with open(path, "w") as fh:
        fh.write("channel,ticks\n")
        for ch, tk in zip(rec["channel"], rec["ticks"]):
            fh.write(f"{ch},{tk}\n")


def read_csv_tags(path, tick_duration: float) -> TimeTagStream:
    chans = {0: [], 1: []}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line == "channel,ticks":
                continue
            parts = line.split(",")
            try:
                ch, tk = int(parts[0]), int(parts[1])
            except (ValueError, IndexError) as exc:
                raise DataFormatError(f"line {lineno}: bad record {line!r}") from exc
            if ch not in (0, 1) or tk < 0:
                raise DataFormatError(f"line {lineno}: bad record {line!r}")
            chans[ch].append(tk)
    out = []
    for c in (0, 1):
        ticks = np.asarray(chans[c], dtype=np.int64)
        if len(ticks) > 1 and (np.diff(ticks) < 0).any():
            raise DataFormatError(f"channel {c} ticks decrease")
        out.append(ticks)
    return TimeTagStream(tick_duration=tick_duration,
                         signal_ticks=out[0], idler_ticks=out[1])
