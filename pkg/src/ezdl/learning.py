"""Easy Dictionary Learning: Hebbian rank-1 updates under sparse inference.

A dictionary of unit-norm atoms is adapted online: filter responses of a
random sample are sparsified by an inference model (a sparseness projection,
optionally preceded by grid pooling or followed by a low-rank reshape), the
sample is approximated through the linear generative model, and the
correlation-coefficient similarity drives a rank-1 update of the atoms.
Constraints on the atoms themselves (unit scale, sparseness, low rank on the
patch grid) are applied once per epoch.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import (
    DimensionMismatch,
    InsufficientData,
    NonUniqueProjection,
    OutOfRange,
    ZeroResponse,
    ZeroVariance,
)
from .linalg import rank_project
from .projection import project_signed
from .sparseness import hoyer_sigma

_MAGIC = b"EZDL"
_VERSION = 1


@dataclass
class Dictionary:
    """Dictionary of unit-norm atoms stored as matrix columns.

    ``patch_shape`` records the pixel layout of a sample when it is an image
    patch (atoms reshape to it column-major); ``grid_shape`` records the
    topographic layout of the atoms.  Either may be None.
    """

    W: np.ndarray
    patch_shape: tuple[int, int] | None = None
    grid_shape: tuple[int, int] | None = None

    def __post_init__(self):
        self.W = np.ascontiguousarray(self.W, dtype=np.float64)
        if self.W.ndim != 2:
            raise DimensionMismatch(f"dictionary must be a matrix, got shape {self.W.shape}")
        if self.patch_shape is not None:
            ph, pw = self.patch_shape
            if ph * pw != self.d:
                raise DimensionMismatch(
                    f"patch shape {self.patch_shape} does not match sample dimension {self.d}")
        if self.grid_shape is not None:
            r, c = self.grid_shape
            if r * c != self.n:
                raise DimensionMismatch(
                    f"grid shape {self.grid_shape} does not match atom count {self.n}")

    @property
    def d(self) -> int:
        return self.W.shape[0]

    @property
    def n(self) -> int:
        return self.W.shape[1]


def save_dictionary(dictionary: Dictionary, path) -> None:
    """Write the bit-exact binary dictionary format.

    Layout: magic "EZDL", u32 version, u32 d, u32 n, u16 patch rows, u16
    patch cols, u16 grid rows, u16 grid cols (zeros when absent), then d*n
    float64 atom entries column-major.  All integers little-endian.
    """
    ph, pw = dictionary.patch_shape or (0, 0)
    r, c = dictionary.grid_shape or (0, 0)
    header = struct.pack("<4sIIIHHHH", _MAGIC, _VERSION,
                         dictionary.d, dictionary.n, ph, pw, r, c)
    body = dictionary.W.astype("<f8").flatten(order="F").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


def load_dictionary(path) -> Dictionary:
    """Read the binary dictionary format written by :func:`save_dictionary`."""
    with open(path, "rb") as fh:
        raw = fh.read()
    head_len = struct.calcsize("<4sIIIHHHH")
    if len(raw) < head_len:
        raise MalformedDictionaryFile("file shorter than the header")
    magic, version, d, n, ph, pw, r, c = struct.unpack("<4sIIIHHHH", raw[:head_len])
    if magic != _MAGIC:
        raise MalformedDictionaryFile(f"bad magic {magic!r}")
    if version != _VERSION:
        raise MalformedDictionaryFile(f"unsupported version {version}")
    body = raw[head_len:]
    if len(body) < 8 * d * n:
        raise MalformedDictionaryFile("truncated atom data")
    w = np.frombuffer(body[: 8 * d * n], dtype="<f8").reshape((d, n), order="F")
    return Dictionary(W=w.copy(),
                      patch_shape=(ph, pw) if ph else None,
                      grid_shape=(r, c) if r else None)


class MalformedDictionaryFile(Exception):
    """Dictionary file does not parse."""


# --- inference models ---------------------------------------------------------


@dataclass(frozen=True)
class Ordinary:
    """Sparseness projection of the raw filter responses."""

    sigma_h: float

    def __post_init__(self):
        if not 0.0 < self.sigma_h < 1.0:
            raise OutOfRange(f"sigma_h must lie in (0, 1), got {self.sigma_h}")


@dataclass(frozen=True)
class Topographic:
    """Grid pooling of the filter responses before the projection."""

    sigma_h: float
    grid: sp.csr_matrix = field(compare=False)

    def __post_init__(self):
        if not 0.0 < self.sigma_h < 1.0:
            raise OutOfRange(f"sigma_h must lie in (0, 1), got {self.sigma_h}")


@dataclass(frozen=True)
class RankTopographic:
    """Projection followed by a low-rank reshape on the atom grid."""

    sigma_h: float
    kappa_h: int
    rows: int
    cols: int

    def __post_init__(self):
        if not 0.0 < self.sigma_h < 1.0:
            raise OutOfRange(f"sigma_h must lie in (0, 1), got {self.sigma_h}")
        if not 1 <= self.kappa_h <= min(self.rows, self.cols):
            raise OutOfRange(
                f"kappa_h must lie in [1, {min(self.rows, self.cols)}], got {self.kappa_h}")


InferenceModel = Ordinary | Topographic | RankTopographic


def build_topography(rows: int, cols: int) -> sp.csr_matrix:
    """Row-stochastic 3x3 average-pooling operator on a wrapped grid.

    Entry (i, j) counts the offsets of a 3x3 neighborhood that map the grid
    cell of atom j onto the cell of atom i under circular wraparound,
    divided by 9; cells are indexed row-major.
    """
    if rows < 1 or cols < 1:
        raise OutOfRange(f"grid must be at least 1x1, got {rows}x{cols}")
    n = rows * cols
    g = sp.lil_matrix((n, n))
    for row in range(rows):
        for col in range(cols):
            j = row * cols + col
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    i = ((row + dy) % rows) * cols + (col + dx) % cols
                    g[i, j] += 1.0 / 9.0
    return g.tocsr()


def infer(u, model: InferenceModel, lambda2: float | None = None,
          rng: np.random.Generator | None = None) -> np.ndarray:
    """Sparse code word for the filter responses ``u`` under ``model``.

    ``lambda2=None`` preserves the L2 norm of the projected vector.  When the
    projection is ambiguous because of exactly tied responses and ``rng`` is
    given, a seeded uniform jitter of relative magnitude 1e-10 is added and
    the projection retried once; without ``rng`` the error propagates.
    """
    u = np.asarray(u, dtype=np.float64)
    if not u.any():
        raise ZeroResponse("filter responses are exactly zero")

    if isinstance(model, Topographic):
        v = model.grid @ u
        if not v.any():
            raise ZeroResponse("pooled filter responses are exactly zero")
    else:
        v = u

    try:
        h = project_signed(v, model.sigma_h, lambda2)
    except NonUniqueProjection:
        if rng is None:
            raise
        jitter = 1e-10 * float(np.abs(v).max())
        h = project_signed(v + rng.uniform(-jitter, jitter, v.size),
                           model.sigma_h, lambda2)

    if isinstance(model, RankTopographic):
        grid = h.reshape((model.rows, model.cols), order="F")
        h = rank_project(grid, model.kappa_h).reshape(-1, order="F")
    return h


# --- correlation similarity ---------------------------------------------------


def _corr_parts(a: np.ndarray, x: np.ndarray):
    d = a.size
    sa = float(a.sum())
    sx = float(x.sum())
    lam = float(a @ a) - sa * sa / d
    mu = float(x @ x) - sx * sx / d
    if lam <= 1e-14 * float(a @ a) or mu <= 1e-14 * float(x @ x):
        raise ZeroVariance("centered variance vanishes")
    rho = (float(a @ x) - sa * sx / d) / math.sqrt(lam * mu)
    return sa, sx, lam, mu, rho


def corrcoef(a, x) -> float:
    """Pearson correlation coefficient between two vectors."""
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if a.shape != x.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {x.shape}")
    return _corr_parts(a, x)[4]


def corrcoef_grad(a, x) -> np.ndarray:
    """Gradient of ``corrcoef(a, x)`` with respect to its first argument."""
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if a.shape != x.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {x.shape}")
    d = a.size
    sa, sx, lam, mu, rho = _corr_parts(a, x)
    return (x - sx / d) / math.sqrt(lam * mu) - (rho / lam) * (a - sa / d)


# --- training -----------------------------------------------------------------


@dataclass
class TrainConfig:
    """Hyperparameters of one training run.

    ``noise_std0`` is the relative scale of the exploration noise added to
    the code words: the standard deviation at epoch ``nu`` is
    ``noise_std0 * noise_decay**(nu - 1) * ||h||_2 / sqrt(n)``.
    """

    eta0: float
    epochs: int
    samples_per_epoch: int
    model: InferenceModel
    atom_sigma: float | None = None
    atom_rank: int | None = None
    noise_std0: float = 0.01
    noise_decay: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if self.eta0 < 0.0:
            raise OutOfRange(f"eta0 must be nonnegative, got {self.eta0}")
        if self.epochs < 1 or self.samples_per_epoch < 1:
            raise OutOfRange("epochs and samples_per_epoch must be positive")
        if self.atom_sigma is not None and not 0.0 < self.atom_sigma < 1.0:
            raise OutOfRange(f"atom_sigma must lie in (0, 1), got {self.atom_sigma}")
        if self.noise_std0 < 0.0:
            raise OutOfRange(f"noise_std0 must be nonnegative, got {self.noise_std0}")
        if not 0.0 < self.noise_decay <= 1.0:
            raise OutOfRange(f"noise_decay must lie in (0, 1], got {self.noise_decay}")


@dataclass
class EpochStats:
    """Outcome counters of one epoch."""

    presented: int
    skipped: int
    code_sigma_max_err: float


def train_epoch(dictionary: Dictionary, data, cfg: TrainConfig,
                epoch_index: int, rng: np.random.Generator) -> tuple[Dictionary, EpochStats]:
    """Run one learning epoch, mutating ``dictionary`` in place.

    Presents ``cfg.samples_per_epoch`` samples drawn uniformly with
    replacement from ``data`` (anything exposing ``data`` as a matrix of
    sample columns and ``count``), with step size ``eta0 / epoch_index``.
    Samples whose approximation has zero centered variance are counted and
    skipped.  Finishes with the per-atom constraint pass.

    Per sample the generator is consumed in a fixed order (index draw, then
    jitter if triggered, then noise), so identical seeds reproduce identical
    dictionaries bit for bit.
    """
    if epoch_index < 1:
        raise OutOfRange(f"epoch index starts at 1, got {epoch_index}")
    W = dictionary.W
    if W.shape[0] != data.data.shape[0]:
        raise DimensionMismatch(
            f"dictionary dimension {W.shape[0]} != sample dimension {data.data.shape[0]}")
    eta = cfg.eta0 / epoch_index
    noise_rel = cfg.noise_std0 * cfg.noise_decay ** (epoch_index - 1)
    n = dictionary.n
    root_n = math.sqrt(n)
    track_sigma = noise_rel == 0.0 and not isinstance(cfg.model, RankTopographic)

    skipped = 0
    sigma_err = 0.0
    for _ in range(cfg.samples_per_epoch):
        idx = int(rng.integers(data.count))
        x = data.data[:, idx]
        u = W.T @ x
        try:
            h = infer(u, cfg.model, rng=rng)
        except (ZeroResponse, ZeroVariance):
            skipped += 1
            continue
        if track_sigma:
            sigma_err = max(sigma_err, abs(hoyer_sigma(h) - cfg.model.sigma_h))
        if noise_rel > 0.0:
            std = noise_rel * float(np.linalg.norm(h)) / root_n
            h = h + rng.normal(0.0, std, n)
        try:
            g = corrcoef_grad(W @ h, x)
        except ZeroVariance:
            skipped += 1
            continue
        # ascent on the correlation: descending it would anti-learn
        W += eta * np.outer(g, h)

    apply_atom_constraints(dictionary, cfg)
    return dictionary, EpochStats(presented=cfg.samples_per_epoch, skipped=skipped,
                                  code_sigma_max_err=sigma_err if track_sigma else math.nan)


def apply_atom_constraints(dictionary: Dictionary, cfg: TrainConfig) -> Dictionary:
    """Normalize every atom and apply the optional per-atom projections.

    Order per column: normalize to unit scale, project to the atom
    sparseness ``atom_sigma`` (norm-preserving), replace by the best
    rank-``atom_rank`` approximation on the patch grid, renormalize.
    Zero atoms are left untouched.
    """
    if cfg.atom_rank is not None and dictionary.patch_shape is None:
        raise DimensionMismatch("atom_rank requires a patch shape")
    W = dictionary.W
    for i in range(dictionary.n):
        w = W[:, i]
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            continue
        w = w / norm
        if cfg.atom_sigma is not None:
            w = project_signed(w, cfg.atom_sigma)
        if cfg.atom_rank is not None:
            ph, pw = dictionary.patch_shape
            patch = w.reshape((ph, pw), order="F")
            w = rank_project(patch, cfg.atom_rank).reshape(-1, order="F")
            norm = float(np.linalg.norm(w))
            if norm == 0.0:
                continue
            w = w / norm
        W[:, i] = w
    return dictionary


def init_dictionary(data, n: int, rng: np.random.Generator,
                    patch_shape: tuple[int, int] | None = None,
                    grid_shape: tuple[int, int] | None = None) -> Dictionary:
    """Dictionary of ``n`` distinct random samples, column-normalized."""
    if data.count < n:
        raise InsufficientData(f"need {n} samples, have {data.count}")
    idx = rng.choice(data.count, size=n, replace=False)
    W = data.data[:, idx].astype(np.float64, copy=True)
    norms = np.linalg.norm(W, axis=0)
    W /= np.where(norms == 0.0, 1.0, norms)
    return Dictionary(W=W, patch_shape=patch_shape, grid_shape=grid_shape)


def train(data, n_atoms: int, cfg: TrainConfig,
          patch_shape: tuple[int, int] | None = None,
          grid_shape: tuple[int, int] | None = None,
          progress=None) -> Dictionary:
    """Initialize from random samples and run ``cfg.epochs`` epochs.

    ``progress`` may be a callable receiving ``(epoch_index, EpochStats)``
    after each epoch.
    """
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    dictionary = init_dictionary(data, n_atoms, rng,
                                 patch_shape=patch_shape, grid_shape=grid_shape)
    for epoch in range(1, cfg.epochs + 1):
        _, stats = train_epoch(dictionary, data, cfg, epoch, rng)
        if progress is not None:
            progress(epoch, stats)
    return dictionary
