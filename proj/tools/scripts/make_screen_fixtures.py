#!/usr/bin/env python3
"""Writes the .pxs screen fixtures used by the features command tests.

Usage: make_screen_fixtures.py OUT_DIR
"""
import struct
import sys
from pathlib import Path


def record(width, height, palette, pixels):
    assert len(pixels) == width * height
    assert all(0 <= p < palette for p in pixels)
    return b"PXS" + bytes([1]) + struct.pack("<HHH", width, height, palette) + bytes(pixels)


def sprite(width, height, boxes):
    px = [0] * (width * height)
    for x0, y0, w, h, color in boxes:
        for y in range(y0, y0 + h):
            for x in range(x0, x0 + w):
                px[y * width + x] = color
    return px


def main():
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)

    # Full-size frames: a paddle, a ball and a score digit that move a bit.
    w, h = 160, 210
    first = sprite(w, h, [(70, 190, 16, 4, 12), (80, 100, 2, 4, 33), (10, 5, 6, 8, 71)])
    second = sprite(w, h, [(74, 190, 16, 4, 12), (83, 96, 2, 4, 33), (10, 5, 6, 8, 71)])
    (out / "atari_pair.pxs").write_bytes(record(w, h, 128, first) + record(w, h, 128, second))

    # 2x2 screen, two colors; one pixel lit, then it moves.
    (out / "toy_pair.pxs").write_bytes(
        record(2, 2, 2, [1, 0, 0, 0]) + record(2, 2, 2, [0, 0, 0, 1]))

    (out / "empty_pair.pxs").write_bytes(
        record(8, 8, 2, [0] * 64) + record(8, 8, 2, [0] * 64))


if __name__ == "__main__":
    main()
