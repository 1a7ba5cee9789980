"""Binary PPM (P6) color images, PGM (P5) label masks, and keypoint text.

Images are (h, w, 3) float32 in [0, 1]. Masks are (h, w) uint8 where the
pixel value is the instance id (0 = background). Keypoint files hold one
"id x y" line per point, pixel coordinates.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import FormatError

_WHITESPACE = b" \t\r\n"


def _next_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    """Next header token, skipping whitespace and '#' comments."""
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c in (b"#",):
            while pos < n and buf[pos : pos + 1] != b"\n":
                pos += 1
        elif c in (b" ", b"\t", b"\r", b"\n"):
            pos += 1
        else:
            break
    if pos >= n:
        raise FormatError("unexpected end of header", offset=pos)
    start = pos
    while pos < n and buf[pos : pos + 1] not in (b" ", b"\t", b"\r", b"\n", b"#"):
        pos += 1
    return buf[start:pos], pos


def _parse_header(buf: bytes, expected_magic: bytes) -> tuple[int, int, int]:
    """Returns (width, height, payload_offset). Maxval must be 255."""
    magic, pos = _next_token(buf, 0)
    if magic != expected_magic:
        raise FormatError(
            f"unsupported magic {magic!r}, expected {expected_magic.decode()}", offset=0
        )
    dims = []
    for _ in range(3):
        tok, pos = _next_token(buf, pos)
        if not tok.isdigit():
            raise FormatError(f"non-numeric header field {tok!r}", offset=pos - len(tok))
        dims.append(int(tok))
    width, height, maxval = dims
    if width < 1 or height < 1:
        raise FormatError(f"bad dimensions {width}x{height}", offset=0)
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}, only 255", offset=pos)
    # exactly one whitespace byte separates header from payload
    if pos >= len(buf) or buf[pos : pos + 1] not in (b" ", b"\t", b"\r", b"\n"):
        raise FormatError("missing whitespace before payload", offset=pos)
    return width, height, pos + 1


def load_ppm(path: str | os.PathLike) -> np.ndarray:
    """Load a binary P6 PPM as (h, w, 3) float32 in [0, 1]."""
    with open(path, "rb") as f:
        buf = f.read()
    width, height, offset = _parse_header(buf, b"P6")
    need = width * height * 3
    payload = buf[offset : offset + need]
    if len(payload) < need:
        raise FormatError(
            f"truncated payload: expected {need} bytes, got {len(payload)}",
            offset=offset + len(payload),
        )
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return raw.astype(np.float32) / 255.0


def save_ppm(image: np.ndarray, path: str | os.PathLike) -> None:
    """Write (h, w, 3) values in [0, 1] as binary P6, rounding to 8 bits."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise FormatError(f"expected (h, w, 3) image, got {image.shape}")
    h, w = image.shape[:2]
    raw = np.rint(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (w, h))
        f.write(raw.tobytes())


def load_pgm(path: str | os.PathLike) -> np.ndarray:
    """Load a binary P5 PGM as (h, w) uint8 (pixel value = instance id)."""
    with open(path, "rb") as f:
        buf = f.read()
    width, height, offset = _parse_header(buf, b"P5")
    need = width * height
    payload = buf[offset : offset + need]
    if len(payload) < need:
        raise FormatError(
            f"truncated payload: expected {need} bytes, got {len(payload)}",
            offset=offset + len(payload),
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


def save_pgm(labels: np.ndarray, path: str | os.PathLike) -> None:
    if labels.ndim != 2:
        raise FormatError(f"expected (h, w) labels, got {labels.shape}")
    h, w = labels.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(labels.astype(np.uint8).tobytes())


def load_keypoints(path: str | os.PathLike) -> list[tuple[int, float, float]]:
    """Read "id x y" lines; blank lines and '#' comments are skipped."""
    points = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise FormatError(f"bad keypoint line {lineno}: {line!r}")
            points.append((int(parts[0]), float(parts[1]), float(parts[2])))
    return points


def save_keypoints(points: list[tuple[int, float, float]], path: str | os.PathLike) -> None:
    with open(path, "w") as f:
        for pid, x, y in points:
            f.write(f"{pid} {x:.3f} {y:.3f}\n")
