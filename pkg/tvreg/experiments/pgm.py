"""Portable graymap (PGM) input, ASCII (P2) and binary (P5)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from tvreg.core.fields import ScalarField
from tvreg.core.grid import MIN_CELLS, rectangle


class PgmError(ValueError):
    """Malformed or unsupported PGM file."""


def _tokens(data: bytes, count: int, start: int = 0) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments.

    Returns the tokens and the offset just past the last one.
    """
    tokens: list[bytes] = []
    pos = start
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise PgmError("truncated PGM header")
        if data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        begin = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[begin:pos])
    return tokens, pos


def _header_int(token: bytes, what: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise PgmError(f"PGM {what} is not an integer: {token!r}") from None
    if value <= 0:
        raise PgmError(f"PGM {what} must be positive, got {value}")
    return value


def read_pgm(path: str | Path) -> np.ndarray:
    """Samples of a PGM image as a ``(width, height)`` array scaled to ``[0, 1]``.

    Axis 0 runs along image columns (x), axis 1 along rows (y).

    Raises:
        PgmError: bad magic, malformed header, maxval outside ``1..65535``,
            or too few samples.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise PgmError(f"cannot read {path}: {exc}") from exc
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PgmError(f"unsupported format {magic!r}; expected P2 or P5")
    (w_tok, h_tok, m_tok), pos = _tokens(data, 3, start=2)
    width = _header_int(w_tok, "width")
    height = _header_int(h_tok, "height")
    maxval = _header_int(m_tok, "maxval")
    if maxval > 65535:
        raise PgmError(f"maxval {maxval} exceeds 65535")
    count = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        body = data[pos + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        if len(body) < need:
            raise PgmError(f"truncated raster: need {need} bytes, got {len(body)}")
        samples = np.frombuffer(body[:need], dtype=dtype).astype(np.float64)
    else:
        parts = data[pos:].split()
        if len(parts) < count:
            raise PgmError(f"truncated raster: need {count} samples, got {len(parts)}")
        try:
            samples = np.array([int(p) for p in parts[:count]], dtype=np.float64)
        except ValueError:
            raise PgmError("non-integer sample in ASCII raster") from None
    if np.any(samples > maxval):
        raise PgmError(f"sample exceeds maxval {maxval}")
    return (samples / maxval).reshape(height, width).T.copy()


def load_pgm(path: str | Path) -> ScalarField:
    """A PGM image as a field on the rectangle with ``h = 1 / max(nx, ny)``.

    Raises:
        PgmError: unreadable image, or fewer than 3 pixels along an axis.
    """
    values = read_pgm(path)
    nx, ny = values.shape
    if nx < MIN_CELLS or ny < MIN_CELLS:
        raise PgmError(f"image {nx}x{ny} is smaller than {MIN_CELLS} pixels per axis")
    h = 1.0 / max(nx, ny)
    grid = rectangle(nx, ny, nx * h, ny * h)
    return ScalarField(grid, values)
