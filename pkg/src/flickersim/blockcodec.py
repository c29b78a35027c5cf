"""Miniature 8x8 block encoder.

Demonstrates from first principles why a flickering scene defeats
inter-frame prediction: intra coding is DCT + uniform quantization +
zig-zag run-length tokens, inter coding adds full-search motion
compensation.  Output sizes are estimated from the empirical entropy of
the token stream rather than a concrete entropy-coder bitstream; the
model is used for size *orderings*, not codec-compliant output.

Fixture frames live in portable grayscale maps (binary PGM, "P5"):
magic line, width and height, maxval 255, then row-major 8-bit samples.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.fft import dctn

BLOCK = 8
DEFAULT_QUANTIZER = 16
DEFAULT_SEARCH_RADIUS = 8
MV_COST_BYTES = 2

EOB = ("eob",)


class ChromaScheme(Enum):
    S444 = "4:4:4"
    S420 = "4:2:0"


@dataclass
class BlockFrame:
    """Luma-plane frame; chroma is subsampled away and not size-modelled."""

    luma: np.ndarray
    chroma_scheme: ChromaScheme = ChromaScheme.S420

    def __post_init__(self) -> None:
        self.luma = np.asarray(self.luma)
        h, w = self.luma.shape
        if h % BLOCK or w % BLOCK:
            raise ValueError("frame dimensions must be multiples of 8")
        if self.luma.dtype != np.uint8:
            if self.luma.min() < 0 or self.luma.max() > 255:
                raise ValueError("samples must lie in [0, 255]")
            self.luma = self.luma.astype(np.uint8)

    @property
    def width(self) -> int:
        return self.luma.shape[1]

    @property
    def height(self) -> int:
        return self.luma.shape[0]


def _zigzag_order() -> list[tuple[int, int]]:
    order = sorted(
        ((r, c) for r in range(BLOCK) for c in range(BLOCK)),
        key=lambda rc: (rc[0] + rc[1], rc[1] if (rc[0] + rc[1]) % 2 else rc[0]),
    )
    return order

_ZIGZAG = _zigzag_order()
_ZZ_ROWS = np.array([r for r, _ in _ZIGZAG])
_ZZ_COLS = np.array([c for _, c in _ZIGZAG])


def _block_tokens(block: np.ndarray, quantizer: int, tokens: list) -> None:
    coefs = dctn(block.astype(np.float64), norm="ortho")
    q = np.round(coefs / quantizer).astype(np.int64)
    zz = q[_ZZ_ROWS, _ZZ_COLS]
    run = 0
    for level in zz:
        if level == 0:
            run += 1
        else:
            tokens.append((run, int(level)))
            run = 0
    tokens.append(EOB)


def _entropy_bytes(tokens: list) -> int:
    total = len(tokens)
    if total == 0:
        return 1
    counts = Counter(tokens)
    h = 0.0
    for c in counts.values():
        p = c / total
        h -= p * math.log2(p)
    return max(1, math.ceil(total * h / 8))


def _iter_blocks(plane: np.ndarray):
    h, w = plane.shape
    for r in range(0, h, BLOCK):
        for c in range(0, w, BLOCK):
            yield plane[r:r + BLOCK, c:c + BLOCK]


def encode_intra(frame: BlockFrame, quantizer: int = DEFAULT_QUANTIZER) -> int:
    """Bytes needed to code the frame without a reference."""
    if quantizer < 1:
        raise ValueError("quantizer must be >= 1")
    tokens: list = []
    for block in _iter_blocks(frame.luma):
        _block_tokens(block, quantizer, tokens)
    return _entropy_bytes(tokens)


def _motion_residuals(cur: np.ndarray, ref: np.ndarray, radius: int) -> np.ndarray:
    """Best-match residual per block under full-search SAD within radius."""
    h, w = cur.shape
    nbr, nbc = h // BLOCK, w // BLOCK
    padded = np.pad(ref.astype(np.int64), radius, mode="edge")
    cur64 = cur.astype(np.int64)
    cur_blocks = cur64.reshape(nbr, BLOCK, nbc, BLOCK)

    best_sad = np.full((nbr, nbc), np.iinfo(np.int64).max, dtype=np.int64)
    best_off = np.zeros((nbr, nbc, 2), dtype=np.int64)
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            shifted = padded[radius + dy:radius + dy + h, radius + dx:radius + dx + w]
            diff = np.abs(cur64 - shifted).reshape(nbr, BLOCK, nbc, BLOCK)
            sad = diff.sum(axis=(1, 3))
            better = sad < best_sad
            best_sad = np.where(better, sad, best_sad)
            best_off[better] = (dy, dx)

    residuals = np.empty((nbr, nbc, BLOCK, BLOCK), dtype=np.int64)
    for br in range(nbr):
        for bc in range(nbc):
            dy, dx = best_off[br, bc]
            r0, c0 = br * BLOCK, bc * BLOCK
            ref_block = padded[radius + dy + r0:radius + dy + r0 + BLOCK,
                               radius + dx + c0:radius + dx + c0 + BLOCK]
            residuals[br, bc] = cur_blocks[br, :, bc, :] - ref_block
    return residuals


def encode_inter(frame: BlockFrame, reference: BlockFrame,
                 search_radius: int = DEFAULT_SEARCH_RADIUS,
                 quantizer: int = DEFAULT_QUANTIZER,
                 mv_cost_bytes: int = MV_COST_BYTES) -> int:
    """Bytes to code the frame as motion vectors plus coded residuals."""
    if frame.luma.shape != reference.luma.shape:
        raise ValueError("frame and reference dimensions differ")
    if quantizer < 1:
        raise ValueError("quantizer must be >= 1")
    residuals = _motion_residuals(frame.luma, reference.luma, search_radius)
    nbr, nbc = residuals.shape[:2]
    tokens: list = []
    for br in range(nbr):
        for bc in range(nbc):
            _block_tokens(residuals[br, bc], quantizer, tokens)
    return _entropy_bytes(tokens) + mv_cost_bytes * nbr * nbc


# ---------------------------------------------------------------------------
# Fixture frames and PGM I/O

def write_pgm(path: str | Path, frame: BlockFrame) -> None:
    header = f"P5\n{frame.width} {frame.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + frame.luma.tobytes())


def read_pgm(path: str | Path) -> BlockFrame:
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError("not a binary portable graymap")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError("only 8-bit graymaps are supported")
    pos += 1  # single whitespace after maxval
    raster = np.frombuffer(data[pos:pos + width * height], dtype=np.uint8)
    return BlockFrame(raster.reshape(height, width).copy())


def uniform_frame(size: int = 64, value: int = 128) -> BlockFrame:
    return BlockFrame(np.full((size, size), value, dtype=np.uint8))


def textured_frame(size: int = 64, seed: int = 7) -> BlockFrame:
    """Detail-rich office-like fixture: gradients plus fine texture."""
    y, x = np.mgrid[0:size, 0:size]
    base = 110 + 60 * np.sin(x / 6.0) * np.cos(y / 9.0) + 0.4 * x
    rng = np.random.default_rng(seed)
    noise = rng.normal(0, 20, (size, size))
    return BlockFrame(np.clip(base + noise, 0, 255).astype(np.uint8))


def stripe_frame(size: int = 64, seed: int = 1) -> BlockFrame:
    """High-contrast horizontal bands of random widths.

    A dazzled sensor produces a new band layout every frame, so two
    different seeds stand for two consecutive attack frames; no
    translation maps one onto the other.
    """
    rng = np.random.default_rng(seed)
    img = np.empty((size, size), dtype=np.uint8)
    row = 0
    low = True
    while row < size:
        band = int(rng.integers(2, 7))
        img[row:row + band, :] = 20 if low else 235
        low = not low
        row += band
    return BlockFrame(img)


def flicker_pair(size: int = 64) -> tuple[BlockFrame, BlockFrame]:
    """Two consecutive frames of a flickering scene."""
    return stripe_frame(size, seed=1), stripe_frame(size, seed=2)


def noise_frame(size: int = 64, seed: int = 11) -> BlockFrame:
    rng = np.random.default_rng(seed)
    return BlockFrame(rng.integers(0, 256, (size, size), dtype=np.uint8).copy())


def panning_pair(size: int = 64, shift: int = 3) -> tuple[BlockFrame, BlockFrame]:
    """(current, reference) views of a smooth scene panned by `shift` px.

    The entering strip is genuinely new content, so inter coding of the
    pair costs strictly more than coding a frame against itself, while
    motion compensation absorbs everything else.
    """
    master_size = size + 2 * shift + 10
    y, x = np.mgrid[0:master_size, 0:master_size]
    img = 120 + 60 * np.sin(x / 16.0) * np.cos(y / 20.0) + 0.2 * y
    master = np.clip(img, 0, 255).astype(np.uint8)
    reference = BlockFrame(master[0:size, 0:size].copy())
    current = BlockFrame(master[shift:size + shift, shift:size + shift].copy())
    return current, reference
