"""Desk-scale feature backend: P6 pixmap decoding, HSV color histograms,
histogram normalization, and exact nearest-neighbor rank tables.

HSV uses the standard hexcone model with H in [0, 360) and S, V in [0, 1];
gray pixels (undefined hue) fall into hue bin 0. Bin edges are uniform per
channel. These conventions are fixed for reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus_io import FeatureMatrix, FormatError, RankTable

__all__ = [
    "RawImage",
    "load_ppm",
    "hsv_histogram",
    "normalize_histogram",
    "build_rank_table",
    "features_from_manifest",
]


@dataclass(frozen=True)
class RawImage:
    """Decoded 8-bit RGB image; pixels has shape (height, width, 3)."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.uint8)
        if arr.shape != (self.height, self.width, 3):
            raise ValueError("pixel buffer does not match width*height RGB triples")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)


def _next_token(data, pos):
    """Next whitespace-delimited header token, skipping '#' comments."""
    while pos < len(data):
        c = data[pos : pos + 1]
        if c.isspace():
            pos += 1
        elif c == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < len(data) and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise FormatError("truncated pixmap header")
    return data[start:pos], pos


def load_ppm(path):
    """Decode a binary P6 portable pixmap with maxval 255."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic != b"P6":
        raise FormatError(f"{path}: unsupported pixmap magic {magic!r} (need binary 'P6')")
    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _next_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise FormatError(f"{path}: bad header token {token!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"{path}: non-positive dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"{path}: unsupported maxval {maxval} (need 255)")
    pos += 1  # single whitespace byte terminates the header
    need = width * height * 3
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise FormatError(f"{path}: truncated payload ({len(payload)} of {need} bytes)")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return RawImage(width, height, pixels)


def _rgb_to_hsv(rgb):
    """Vectorized hexcone conversion; rgb in [0, 1], returns (h_deg, s, v)."""
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    mx = np.max(rgb, axis=-1)
    mn = np.min(rgb, axis=-1)
    delta = mx - mn
    v = mx
    s = np.where(mx > 0, delta / np.where(mx > 0, mx, 1.0), 0.0)
    h = np.zeros_like(mx)
    nz = delta > 0
    safe = np.where(nz, delta, 1.0)
    rmax = nz & (mx == r)
    gmax = nz & ~rmax & (mx == g)
    bmax = nz & ~rmax & ~gmax
    h = np.where(rmax, (g - b) / safe, h)
    h = np.where(gmax, 2.0 + (b - r) / safe, h)
    h = np.where(bmax, 4.0 + (r - g) / safe, h)
    h = (h * 60.0) % 360.0
    return h, s, v


def hsv_histogram(img, bins_per_channel=10):
    """Joint HSV histogram with bins_per_channel^3 cells; sums to the pixel count."""
    b = int(bins_per_channel)
    if b < 1:
        raise ValueError("bins_per_channel must be >= 1")
    rgb = img.pixels.reshape(-1, 3).astype(np.float64) / 255.0
    h, s, v = _rgb_to_hsv(rgb)
    hb = np.minimum((h / 360.0 * b).astype(np.int64), b - 1)
    sb = np.minimum((s * b).astype(np.int64), b - 1)
    vb = np.minimum((v * b).astype(np.int64), b - 1)
    idx = (hb * b + sb) * b + vb
    return np.bincount(idx, minlength=b**3).astype(np.float64)


def normalize_histogram(v, exponent=0.5):
    """L1-normalize then power-scale (default square root, giving unit L2)."""
    v = np.asarray(v, dtype=np.float64)
    if v.size and v.min() < 0:
        raise ValueError("histogram entries must be non-negative")
    total = v.sum()
    if total <= 0:
        raise ValueError("cannot normalize an all-zero histogram")
    return (v / total) ** exponent


def _pairwise_sq_dists(rows, block=128):
    n = rows.shape[0]
    d2 = np.empty((n, n))
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = rows[start:stop, None, :] - rows[None, :, :]
        d2[start:stop] = np.einsum("ijk,ijk->ij", diff, diff)
    return d2


def build_rank_table(features, block=128):
    """Exact Euclidean nearest-neighbor orderings; distance ties break by ascending id."""
    n = features.n
    if n < 2:
        raise ValueError("need at least 2 images to build a rank table")
    d2 = _pairwise_sq_dists(features.rows, block=block)
    np.fill_diagonal(d2, np.inf)
    # stable sort: equal distances keep ascending-index order
    order = np.argsort(d2, axis=1, kind="stable")
    return RankTable(order[:, : n - 1])


def features_from_manifest(paths, bins_per_channel=10, exponent=0.5):
    """Histogram + normalize every image listed in id order."""
    rows = [
        normalize_histogram(hsv_histogram(load_ppm(p), bins_per_channel), exponent)
        for p in paths
    ]
    return FeatureMatrix(np.vstack(rows))
