"""Generate the deterministic grayscale test images under assets/images/.

Each image is a seeded superposition of oriented Gabor-like waves, soft
blobs and a global gradient, scaled to 8-bit, so dictionaries can learn
oriented structure from small patch sets.  Rerunning reproduces the same
bytes; the PGMs are committed, this script only documents their origin.
"""

from pathlib import Path

import numpy as np

from ezdl.imaging import save_pgm

ASSETS = Path(__file__).resolve().parent.parent / "assets" / "images"


def synth_image(seed: int, size: int, components: int = 48) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seed))
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64) / size
    img = 0.35 * (xs * rng.uniform(-1, 1) + ys * rng.uniform(-1, 1))
    for _ in range(components):
        cx, cy = rng.uniform(0, 1, 2)
        theta = rng.uniform(0, np.pi)
        u = np.cos(theta) * (xs - cx) + np.sin(theta) * (ys - cy)
        v = -np.sin(theta) * (xs - cx) + np.cos(theta) * (ys - cy)
        su = rng.uniform(0.03, 0.25)
        sv = rng.uniform(0.03, 0.25)
        envelope = np.exp(-0.5 * ((u / su) ** 2 + (v / sv) ** 2))
        freq = rng.uniform(2.0, 18.0)
        phase = rng.uniform(0, 2 * np.pi)
        wave = np.cos(2 * np.pi * freq * u + phase)
        img += rng.uniform(0.2, 1.0) * rng.choice((-1.0, 1.0)) * envelope * wave
    lo, hi = img.min(), img.max()
    return 5.0 + 245.0 * (img - lo) / (hi - lo)


def main() -> None:
    ASSETS.mkdir(parents=True, exist_ok=True)
    specs = [
        ("train1.pgm", 101, 384),
        ("train2.pgm", 102, 384),
        ("train3.pgm", 103, 384),
        ("eval1.pgm", 201, 256),
        ("eval2.pgm", 202, 256),
    ]
    for name, seed, size in specs:
        path = ASSETS / name
        path.write_bytes(save_pgm(synth_image(seed, size)))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
