"""Sparse code inference by projected Landweber ascent and image reproduction.

Code words maximize the correlation between the generative model's output
and the target block under a hard sparseness constraint; step sizes follow
the bold-driver rule (grow on accepted steps, shrink and revert on
rejections, ties rejected).  Whole images are reproduced block by block with
per-block mean and variance restored.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonUniqueProjection, OutOfRange, ZeroVariance
from .learning import Dictionary, corrcoef, corrcoef_grad
from .projection import project_signed


@dataclass
class InferenceConfig:
    """Inference sparseness and bold-driver step control parameters."""

    sigma_i: float
    max_iters: int = 100
    eta_init: float = 1.0
    grow: float = 1.1
    shrink: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.sigma_i < 1.0:
            raise OutOfRange(f"sigma_i must lie in (0, 1), got {self.sigma_i}")
        if self.max_iters < 1:
            raise OutOfRange(f"max_iters must be positive, got {self.max_iters}")
        if self.eta_init <= 0.0 or self.grow <= 1.0 or not 0.0 < self.shrink < 1.0:
            raise OutOfRange("step control requires eta_init > 0, grow > 1, 0 < shrink < 1")


def landweber_infer(dictionary: Dictionary, x, cfg: InferenceConfig) -> np.ndarray:
    """Code word with sparseness ``sigma_i`` approximating ``x``.

    Starts from the projected filter responses (the first gradient step from
    the null vector, where the correlation objective is undefined) and runs
    up to ``max_iters - 1`` projected ascent steps on the correlation; a
    candidate is accepted only when it strictly improves the objective, so
    the sequence of accepted values is non-decreasing by construction.
    """
    x = np.asarray(x, dtype=np.float64)
    W = dictionary.W
    if x.shape != (dictionary.d,):
        raise DimensionMismatch(f"sample has shape {x.shape}, expected ({dictionary.d},)")
    h = project_signed(W.T @ x, cfg.sigma_i)
    approx = W @ h
    best = corrcoef(approx, x)
    eta = cfg.eta_init
    for _ in range(cfg.max_iters - 1):
        step = W.T @ corrcoef_grad(approx, x)
        try:
            candidate = project_signed(h + eta * step, cfg.sigma_i)
            cand_approx = W @ candidate
            score = corrcoef(cand_approx, x)
        except (NonUniqueProjection, ZeroVariance):
            # degenerate candidate: treat like any non-improving step
            score = -math.inf
            candidate = cand_approx = None
        if score > best:
            h, approx, best = candidate, cand_approx, score
            eta *= cfg.grow
        else:
            eta *= cfg.shrink
    return h


def _reproduce_block(dictionary: Dictionary, block: np.ndarray,
                     cfg: InferenceConfig) -> np.ndarray:
    m = float(block.mean())
    s = float(block.std())
    if s < 1e-6:
        return block
    size = block.shape[0]
    x = (block.flatten(order="F") - m) / s
    h = landweber_infer(dictionary, x, cfg)
    y = dictionary.W @ h
    ym = float(y.mean())
    ys = float(y.std())
    if ys < 1e-12:
        return np.full_like(block, m)
    y = (y - ym) / ys * s + m
    return y.reshape((size, size), order="F")


def reconstruct_image(dictionary: Dictionary, img: np.ndarray, block: int,
                      cfg: InferenceConfig, threads: int = 1) -> np.ndarray:
    """Blockwise reproduction of an entire image through the dictionary.

    Non-overlapping ``block x block`` tiles are normalized, inferred,
    reproduced and restored to their original mean and deviation; constant
    blocks and trailing strips not divisible by the block size are copied
    through unchanged.  Blocks are independent, so ``threads > 1`` farms
    them out without changing the result.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D image, got shape {img.shape}")
    if dictionary.d != block * block:
        raise DimensionMismatch(
            f"dictionary dimension {dictionary.d} does not match {block}x{block} blocks")
    height, width = img.shape
    out = img.copy()
    tiles = [(r, c)
             for r in range(0, height - block + 1, block)
             for c in range(0, width - block + 1, block)]

    def work(rc):
        r, c = rc
        return rc, _reproduce_block(dictionary, img[r:r + block, c:c + block], cfg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, tiles))
    else:
        results = [work(rc) for rc in tiles]
    for (r, c), tile in results:
        out[r:r + block, c:c + block] = tile
    return out
