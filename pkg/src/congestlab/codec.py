"""Compact byte encoding for message payloads.

A payload is a one-byte tag followed by unsigned LEB128 integers, so a
message carrying a tag and two IDs from ``1..n`` stays within
``8 * max(4, ceil(log2 n))`` bits for every ``n``.
"""
from __future__ import annotations


def pack(tag: int, *values: int) -> bytes:
    if not 0 <= tag < 256:
        raise ValueError(f"tag {tag} does not fit in a byte")
    out = bytearray([tag])
    for v in values:
        if v < 0:
            raise ValueError("only non-negative integers can be packed")
        while True:
            low = v & 0x7F
            v >>= 7
            if v:
                out.append(low | 0x80)
            else:
                out.append(low)
                break
    return bytes(out)


def unpack(data: bytes) -> tuple[int, list[int]]:
    if not data:
        raise ValueError("empty payload")
    values = []
    cur = shift = 0
    for b in data[1:]:
        cur |= (b & 0x7F) << shift
        if b & 0x80:
            shift += 7
        else:
            values.append(cur)
            cur = shift = 0
    if shift:
        raise ValueError("truncated integer in payload")
    return data[0], values
