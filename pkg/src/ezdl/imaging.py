"""Image ingestion, patch extraction, whitening and quality metrics.

Grayscale images are 2-D float64 arrays of shape (height, width) with pixel
values on the 0..255 scale.  All randomized operations take an explicit
generator and are pure functions of (inputs, generator state); noisy or
reconstructed images live in the unclamped real domain, clamping and
rounding happen only when a PGM is written.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .errors import (
    DimensionMismatch,
    InsufficientVariance,
    MalformedHeader,
    OutOfRange,
    RankDeficient,
    TooSmall,
    TruncatedData,
    UnsupportedMaxval,
)
from .linalg import sym_eigh

_PSET_MAGIC = b"PSET"
_PSET_VERSION = 1


# --- PGM ----------------------------------------------------------------------

def load_pgm(data: bytes) -> np.ndarray:
    """Parse a binary (P5) PGM with maxval 255.

    Header tokens may be separated by any whitespace and interleaved with
    '#' comments; exactly one whitespace byte separates the maxval from the
    raster.
    """
    if not data.startswith(b"P5"):
        raise MalformedHeader("not a binary PGM (magic P5 missing)")
    pos = 2
    tokens = []
    while len(tokens) < 3:
        if pos >= len(data):
            raise MalformedHeader("header ended before width, height and maxval")
        ch = data[pos:pos + 1]
        if ch == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise MalformedHeader("unterminated comment")
            pos = nl + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end:end + 1].isspace() and data[end:end + 1] != b"#":
                end += 1
            tok = data[pos:end]
            if not tok.isdigit():
                raise MalformedHeader(f"non-numeric header token {tok!r}")
            tokens.append(int(tok))
            pos = end
    width, height, maxval = tokens
    if width < 1 or height < 1:
        raise MalformedHeader(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedMaxval(f"only maxval 255 is supported, got {maxval}")
    pos += 1  # the single whitespace byte after maxval
    raster = data[pos:pos + width * height]
    if len(raster) < width * height:
        raise TruncatedData(f"raster holds {len(raster)} bytes, need {width * height}")
    img = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    return img.reshape((height, width))


def save_pgm(img: np.ndarray) -> bytes:
    """Serialize an image as binary PGM, clamping to [0, 255] and rounding."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D image, got shape {img.shape}")
    height, width = img.shape
    quantized = np.rint(np.clip(img, 0.0, 255.0)).astype(np.uint8)
    return b"P5\n%d %d\n255\n" % (width, height) + quantized.tobytes()


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return load_pgm(fh.read())


def write_pgm(path, img: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(save_pgm(img))


# --- patches ------------------------------------------------------------------

@dataclass
class PatchSet:
    """Batch of normalized patch vectors.

    ``data`` holds one patch per column, flattened column-major from its
    square pixel layout, normalized to zero mean and unit variance
    (population convention); ``means`` and ``stds`` record the removed
    per-patch statistics.
    """

    patch_dim: int
    count: int
    data: np.ndarray
    means: np.ndarray
    stds: np.ndarray


def extract_patches(img: np.ndarray, size: int, count: int,
                    rng: np.random.Generator) -> PatchSet:
    """Draw ``count`` normalized square patches at uniform random positions.

    Patches with variance below 1e-12 carry no information and are skipped;
    if ``count`` valid patches cannot be found within ``100 * count`` draws
    the image is rejected.
    """
    img = np.asarray(img, dtype=np.float64)
    height, width = img.shape
    if size > min(width, height):
        raise OutOfRange(f"patch size {size} exceeds image dimensions {width}x{height}")
    dim = size * size
    data = np.empty((dim, count))
    means = np.empty(count)
    stds = np.empty(count)
    got = 0
    for _ in range(100 * count):
        if got == count:
            break
        top = int(rng.integers(height - size + 1))
        left = int(rng.integers(width - size + 1))
        patch = img[top:top + size, left:left + size]
        m = float(patch.mean())
        var = float(patch.var())
        if var < 1e-12:
            continue
        s = math.sqrt(var)
        data[:, got] = (patch.flatten(order="F") - m) / s
        means[got] = m
        stds[got] = s
        got += 1
    if got < count:
        raise InsufficientVariance(
            f"found only {got} of {count} non-constant patches in {100 * count} draws")
    return PatchSet(patch_dim=dim, count=count, data=data, means=means, stds=stds)


def merge_patches(parts: list[PatchSet]) -> PatchSet:
    """Concatenate patch sets drawn from several images."""
    if not parts:
        raise OutOfRange("no patch sets to merge")
    dim = parts[0].patch_dim
    if any(p.patch_dim != dim for p in parts):
        raise DimensionMismatch("patch sets have differing dimensions")
    return PatchSet(
        patch_dim=dim,
        count=sum(p.count for p in parts),
        data=np.concatenate([p.data for p in parts], axis=1),
        means=np.concatenate([p.means for p in parts]),
        stds=np.concatenate([p.stds for p in parts]),
    )


def save_patches(patches: PatchSet, path) -> None:
    """Binary dump: magic "PSET", u32 version, u32 dim, u32 count, f64 columns."""
    header = struct.pack("<4sIII", _PSET_MAGIC, _PSET_VERSION,
                         patches.patch_dim, patches.count)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(patches.data.astype("<f8").flatten(order="F").tobytes())


def load_patches(path) -> PatchSet:
    with open(path, "rb") as fh:
        raw = fh.read()
    head_len = struct.calcsize("<4sIII")
    if len(raw) < head_len:
        raise MalformedHeader("file shorter than the patch-set header")
    magic, version, dim, count = struct.unpack("<4sIII", raw[:head_len])
    if magic != _PSET_MAGIC or version != _PSET_VERSION:
        raise MalformedHeader("not a patch-set file")
    body = raw[head_len:]
    if len(body) < 8 * dim * count:
        raise TruncatedData("truncated patch data")
    data = np.frombuffer(body[: 8 * dim * count], dtype="<f8").reshape((dim, count), order="F")
    data = data.copy()
    means = data.mean(axis=0)
    stds = data.std(axis=0)
    return PatchSet(patch_dim=dim, count=count, data=data, means=means, stds=stds)


# --- whitening ----------------------------------------------------------------

@dataclass
class WhitenModel:
    """PCA whitening transform with its dewhitening inverse."""

    k: int
    mean: np.ndarray
    forward: np.ndarray
    backward: np.ndarray


def whiten_fit(patches: PatchSet, k: int) -> WhitenModel:
    """Fit a k-component whitening transform on a patch set.

    The forward map scales the top-k principal components to unit variance;
    sample covariance uses the unbiased (count - 1) convention.  Raises
    :class:`RankDeficient` when the k-th eigenvalue falls below 1e-12 of the
    largest.
    """
    if not 1 <= k <= patches.patch_dim:
        raise OutOfRange(f"k must lie in [1, {patches.patch_dim}], got {k}")
    if patches.count < patches.patch_dim:
        raise OutOfRange("need at least as many patches as dimensions")
    x = patches.data
    mean = x.mean(axis=1)
    centered = x - mean[:, None]
    cov = (centered @ centered.T) / (patches.count - 1)
    evals, evecs = sym_eigh(cov)
    if evals[k - 1] < 1e-12 * evals[0]:
        raise RankDeficient(f"component {k} carries no variance")
    scales = np.sqrt(evals[:k])
    forward = evecs[:, :k].T / scales[:, None]
    backward = evecs[:, :k] * scales
    return WhitenModel(k=k, mean=mean, forward=forward, backward=backward)


def whiten_apply(model: WhitenModel, x) -> np.ndarray:
    """Whitened coefficients of a patch vector (or column batch)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return model.forward @ (x - model.mean)
    return model.forward @ (x - model.mean[:, None])


# --- quality metrics ----------------------------------------------------------

def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in decibels on the 0..255 scale.

    Returns +inf when the mean squared error vanishes (below 1e-12).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse < 1e-12:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)


def _gaussian_window(size: int = 11, std: float = 1.5) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords ** 2) / (2.0 * std * std))
    window = np.outer(g, g)
    return window / window.sum()


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean structural similarity with an 11x11 Gaussian window (std 1.5).

    Local means, variances and covariance come from valid-region
    convolution (no padding); the stabilizers are (0.01*255)^2 and
    (0.03*255)^2.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    if min(a.shape) < 11:
        raise TooSmall(f"image {a.shape} smaller than the 11x11 window")
    window = _gaussian_window()
    c1 = (0.01 * 255.0) ** 2
    c2 = (0.03 * 255.0) ** 2
    mu_a = convolve2d(a, window, mode="valid")
    mu_b = convolve2d(b, window, mode="valid")
    var_a = convolve2d(a * a, window, mode="valid") - mu_a * mu_a
    var_b = convolve2d(b * b, window, mode="valid") - mu_b * mu_b
    cov = convolve2d(a * b, window, mode="valid") - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def add_gaussian_noise(img: np.ndarray, std: float,
                       rng: np.random.Generator) -> np.ndarray:
    """Additive white Gaussian noise in the real domain (no clamping)."""
    img = np.asarray(img, dtype=np.float64)
    if std < 0.0:
        raise OutOfRange(f"noise std must be nonnegative, got {std}")
    if std == 0.0:
        return img.copy()
    return img + rng.normal(0.0, std, img.shape)
