"""Space-time rasters as binary PPM (P6).

Row k is the k-th snapshot, earliest at the top; column i is site i.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

# color index -> RGB; first three follow the dark-to-light blue convention
PALETTE: tuple[tuple[int, int, int], ...] = (
    (8, 48, 107),     # 0 dark blue
    (33, 113, 181),   # 1 blue
    (158, 202, 225),  # 2 light blue
    (253, 141, 60),   # 3 orange
    (166, 54, 3),     # 4 brown
    (116, 196, 118),  # 5 green
    (0, 109, 44),     # 6 dark green
    (158, 154, 200),  # 7 lavender
    (84, 39, 143),    # 8 purple
    (251, 106, 74),   # 9 salmon
    (165, 15, 21),    # 10 dark red
    (240, 240, 240),  # 11 near white
)


def _rows(snapshots) -> list[np.ndarray]:
    rows = []
    for s in snapshots:
        if hasattr(s, "coloring"):
            s = s.coloring
        if hasattr(s, "sites"):
            s = s.sites
        rows.append(np.asarray(s, dtype=np.int64))
    return rows


def render_spacetime(snapshots: Sequence, palette: Sequence[tuple[int, int, int]] = PALETTE) -> bytes:
    rows = _rows(snapshots)
    if not rows:
        raise ValueError("nothing to render")
    width = rows[0].size
    if any(r.size != width for r in rows):
        raise ValueError("snapshots have different widths")
    grid = np.stack(rows)
    if grid.min() < 0 or grid.max() >= len(palette):
        raise ValueError(f"colors must lie in [0, {len(palette)}) for this palette")
    lut = np.asarray(palette, dtype=np.uint8)
    header = f"P6\n{width} {len(rows)}\n255\n".encode("ascii")
    return header + lut[grid].tobytes()


def write_ppm(path, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)


def read_ppm(data: bytes) -> np.ndarray:
    """Parse a P6 image into an (height, width, 3) uint8 array."""
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        end = pos
        while end < len(data) and not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[pos:end])
        pos = end
    if tokens[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise ValueError("only 8-bit PPM is supported")
    body = data[pos + 1:]  # exactly one whitespace byte after maxval
    if len(body) != w * h * 3:
        raise ValueError("pixel payload has the wrong size")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)
