"""DSEQ1 digit-sequence files.

Layout: one ASCII header line ``DSEQ1 base=<b> len=<N>\\n`` followed by
exactly ``N`` payload bytes, one digit per byte.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import DSEQDigitError, DSEQHeaderError, DSEQTruncatedError
from .toeplitz_core import DigitSeq

_HEADER = re.compile(rb"DSEQ1 base=(\d+) len=(\d+)")
_MAX_HEADER = 64


def encode_dseq(seq: DigitSeq) -> bytes:
    header = f"DSEQ1 base={seq.base} len={len(seq)}\n".encode("ascii")
    return header + seq.digits.tobytes()


def decode_dseq(data: bytes) -> DigitSeq:
    nl = data.find(b"\n", 0, _MAX_HEADER)
    if nl < 0:
        raise DSEQHeaderError("missing DSEQ1 header line")
    m = _HEADER.fullmatch(data[:nl])
    if m is None:
        raise DSEQHeaderError(f"malformed header {data[:nl]!r}")
    base, length = int(m.group(1)), int(m.group(2))
    if not 2 <= base <= 255:
        raise DSEQHeaderError(f"base {base} outside [2, 255]")
    payload = np.frombuffer(data, dtype=np.uint8, offset=nl + 1)
    if payload.size != length:
        raise DSEQTruncatedError(
            f"header declares len={length} but payload has {payload.size} bytes"
        )
    if length and int(payload.max()) >= base:
        pos = int(np.argmax(payload >= base)) + 1
        raise DSEQDigitError(f"digit {payload[pos - 1]} at position {pos} >= base {base}")
    return DigitSeq(base, payload.copy())


def read_dseq(path: str | Path) -> DigitSeq:
    return decode_dseq(Path(path).read_bytes())


def write_dseq(path: str | Path, seq: DigitSeq) -> None:
    Path(path).write_bytes(encode_dseq(seq))
