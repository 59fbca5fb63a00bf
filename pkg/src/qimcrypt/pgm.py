"""Minimal PGM (P2 ASCII / P5 binary, maxval 255) reader and writer."""
from __future__ import annotations

import os
from typing import BinaryIO

from .qimage import GrayImage, ImageSizeError

__all__ = ["PGMError", "read_pgm", "write_pgm", "parse_pgm", "format_pgm"]


class PGMError(ValueError):
    pass


def _tokens(data: bytes, count: int, pos: int = 0):
    """Pull ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PGMError("truncated PGM header")
        out.append(data[start:pos])
    return out, pos


def parse_pgm(data: bytes) -> GrayImage:
    (magic,), pos = _tokens(data, 1)
    if magic not in (b"P2", b"P5"):
        raise PGMError(f"not a PGM file (magic {magic!r})")
    try:
        (w, h, maxval), pos = _tokens(data, 3, pos)
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise PGMError(f"bad PGM header: {exc}") from exc
    if maxval != 255:
        raise PGMError(f"only maxval 255 is supported, got {maxval}")
    if width != height or width < 2 or width & (width - 1):
        raise ImageSizeError(f"PGM must be square with a power-of-two side, got {width}x{height}")
    count = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte before the raster
        raster = data[pos:pos + count]
        if len(raster) != count:
            raise PGMError(f"expected {count} raster bytes, got {len(raster)}")
        pixels = list(raster)
    else:
        try:
            toks, _ = _tokens(data, count, pos)
            pixels = [int(t) for t in toks]
        except ValueError as exc:
            raise PGMError(f"bad P2 raster: {exc}") from exc
        if any(not 0 <= p <= 255 for p in pixels):
            raise PGMError("P2 sample outside [0, 255]")
    return GrayImage(width.bit_length() - 1, tuple(pixels))


def format_pgm(image: GrayImage, binary: bool = True) -> bytes:
    side = image.side
    if binary:
        return f"P5\n{side} {side}\n255\n".encode() + bytes(image.pixels)
    rows = [
        " ".join(str(p) for p in image.pixels[r * side:(r + 1) * side])
        for r in range(side)
    ]
    return (f"P2\n{side} {side}\n255\n" + "\n".join(rows) + "\n").encode()


def read_pgm(path: str | os.PathLike | BinaryIO) -> GrayImage:
    if hasattr(path, "read"):
        return parse_pgm(path.read())
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def write_pgm(path: str | os.PathLike, image: GrayImage, binary: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(format_pgm(image, binary))
