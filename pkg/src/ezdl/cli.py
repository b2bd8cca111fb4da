"""Command-line front end.

Subcommands: project, train, reconstruct, corrupt, metrics, bench-solvers,
bench-timing.  Every run is a pure function of its inputs on disk, its flags
and its seed; randomness comes from the counter-based Philox generator so
seeds are portable.  An optional ``--config`` file supplies ``key=value``
pairs (one per line, ``#`` comments) that fill in flags not given
explicitly; unknown keys are rejected.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench, imaging, learning, reconstruct
from .errors import EzdlError
from .learning import MalformedDictionaryFile
from .projection import SOLVERS, project_signed


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so dispatch owns exit codes."""

    def error(self, message):
        raise UsageError(message)


def _grid(text: str) -> tuple[int, int]:
    try:
        r, c = text.lower().split("x")
        return int(r), int(c)
    except ValueError:
        raise UsageError(f"grid must look like RxC, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _name_list(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip()]


_DEFAULTS = {
    "project": {"solver": "newton_sq"},
    "train": {"patch": 8, "atoms": 256, "sigma_h": 0.99, "epochs": 1000,
              "per_epoch": 30000, "eta0": 1.0, "model": "ordinary",
              "patches_per_image": 10000, "noise_std0": 0.01,
              "noise_decay": 0.95, "seed": 0},
    "reconstruct": {"sigma_i": 0.75, "iters": 100, "block": 8, "threads": 1},
    "corrupt": {"std": 25.0, "seed": 0},
    "metrics": {},
    "bench-solvers": {"n_list": [2 ** 4, 2 ** 8, 2 ** 12, 2 ** 16, 2 ** 20, 2 ** 24],
                      "sigma": 0.9, "trials": 100, "seed": 0},
    "bench-timing": {"n_list": [2 ** 4, 2 ** 8, 2 ** 12, 2 ** 16, 2 ** 20, 2 ** 24],
                     "algorithms": list(bench.TIMING_ALGORITHMS),
                     "trials": 10, "sigma_pre": 0.5, "sigma": 0.9,
                     "seed": 0, "reps": 5},
}

_REQUIRED = {
    "project": ["in_path", "out", "sigma"],
    "train": ["images", "out"],
    "reconstruct": ["dict_path", "in_path", "out"],
    "corrupt": ["in_path", "out"],
    "metrics": ["a", "b"],
    "bench-solvers": ["out"],
    "bench-timing": ["out"],
}


def _build_parser() -> tuple[_Parser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="ezdl", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    children = {}

    p = children["project"] = sub.add_parser(
        "project", description="Project a text vector to a target sparseness.")
    p.add_argument("--in", dest="in_path")
    p.add_argument("--out")
    p.add_argument("--sigma", type=float)
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--config")

    p = children["train"] = sub.add_parser("train", description="Train a dictionary on PGM images.")
    p.add_argument("--images")
    p.add_argument("--out")
    p.add_argument("--patch", type=int)
    p.add_argument("--atoms", type=int)
    p.add_argument("--sigma-h", dest="sigma_h", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--per-epoch", dest="per_epoch", type=int)
    p.add_argument("--eta0", type=float)
    p.add_argument("--model", choices=["ordinary", "topographic", "rank-topo"])
    p.add_argument("--grid", type=_grid)
    p.add_argument("--kappa-h", dest="kappa_h", type=int)
    p.add_argument("--atom-sigma", dest="atom_sigma", type=float)
    p.add_argument("--atom-rank", dest="atom_rank", type=int)
    p.add_argument("--whiten", type=int)
    p.add_argument("--patches-per-image", dest="patches_per_image", type=int)
    p.add_argument("--noise-std0", dest="noise_std0", type=float)
    p.add_argument("--noise-decay", dest="noise_decay", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")

    p = children["reconstruct"] = sub.add_parser("reconstruct", description="Reproduce an image blockwise.")
    p.add_argument("--dict", dest="dict_path")
    p.add_argument("--in", dest="in_path")
    p.add_argument("--out")
    p.add_argument("--sigma-i", dest="sigma_i", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--block", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--config")

    p = children["corrupt"] = sub.add_parser("corrupt", description="Add white Gaussian noise to an image.")
    p.add_argument("--in", dest="in_path")
    p.add_argument("--out")
    p.add_argument("--std", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")

    p = children["metrics"] = sub.add_parser("metrics", description="Print PSNR and SSIM of two images.")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--config")

    p = children["bench-solvers"] = sub.add_parser("bench-solvers", description="Solver evaluation-count benchmark.")
    p.add_argument("--out")
    p.add_argument("--n-list", dest="n_list", type=_int_list)
    p.add_argument("--sigma", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")

    p = children["bench-timing"] = sub.add_parser("bench-timing", description="Projection wall-clock benchmark.")
    p.add_argument("--out")
    p.add_argument("--n-list", dest="n_list", type=_int_list)
    p.add_argument("--algorithms", type=_name_list)
    p.add_argument("--trials", type=int)
    p.add_argument("--sigma-pre", dest="sigma_pre", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--config")

    return parser, children


def _config_pairs(path: str) -> dict[str, str]:
    pairs = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        pairs[key.strip()] = value.strip()
    return pairs


def _merge_config(args: argparse.Namespace, parser_actions, command: str) -> None:
    """Fill unset flags from the config file, then from defaults."""
    types = {}
    for action in parser_actions:
        if action.dest not in ("help", "command"):
            types[action.dest.replace("_", "-")] = (action.dest, action.type)
    if args.config:
        for key, value in _config_pairs(args.config).items():
            norm = key.replace("_", "-")
            if norm == "config":
                raise UsageError("config files cannot nest")
            if norm not in types:
                raise UsageError(f"unknown config key {key!r} for {command}")
            dest, conv = types[norm]
            if getattr(args, dest) is None:
                setattr(args, dest, conv(value) if conv else value)
    for dest, value in _DEFAULTS[command].items():
        if getattr(args, dest, None) is None:
            setattr(args, dest, value)
    missing = [d for d in _REQUIRED[command] if getattr(args, d) is None]
    if missing:
        flags = ", ".join("--" + m.replace("_path", "").replace("_", "-") for m in missing)
        raise UsageError(f"{command}: missing required {flags}")


# --- subcommand bodies --------------------------------------------------------

def _read_vector(path: str) -> np.ndarray:
    values = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise EzdlError(f"{path}:{lineno}: not a number: {line!r}") from None
    return np.array(values)


def _write_vector(path: str, v: np.ndarray) -> None:
    Path(path).write_text("".join(f"{x!r}\n" for x in v), encoding="utf-8")


def _cmd_project(args) -> None:
    v = _read_vector(args.in_path)
    _write_vector(args.out, project_signed(v, args.sigma, solver=args.solver))


def _collect_patches(args) -> imaging.PatchSet:
    images = sorted(Path(args.images).glob("*.pgm"))
    if not images:
        raise EzdlError(f"no .pgm images in {args.images}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((args.seed, 0xEC))))
    parts = []
    for path in images:
        img = imaging.load_pgm(path.read_bytes())
        parts.append(imaging.extract_patches(img, args.patch, args.patches_per_image, rng))
    return imaging.merge_patches(parts)


def _cmd_train(args) -> None:
    patches = _collect_patches(args)
    patch_shape = (args.patch, args.patch)

    if args.whiten is not None:
        white = imaging.whiten_fit(patches, args.whiten)
        coeffs = imaging.whiten_apply(white, patches.data)
        patches = imaging.PatchSet(
            patch_dim=args.whiten, count=patches.count, data=coeffs,
            means=np.zeros(patches.count), stds=np.ones(patches.count))
        patch_shape = None

    grid_shape = args.grid
    if args.model == "ordinary":
        model = learning.Ordinary(sigma_h=args.sigma_h)
    elif args.model == "topographic":
        if grid_shape is None:
            raise UsageError("topographic model needs --grid RxC")
        model = learning.Topographic(sigma_h=args.sigma_h,
                                     grid=learning.build_topography(*grid_shape))
    else:
        if grid_shape is None or args.kappa_h is None:
            raise UsageError("rank-topo model needs --grid RxC and --kappa-h")
        model = learning.RankTopographic(sigma_h=args.sigma_h, kappa_h=args.kappa_h,
                                         rows=grid_shape[0], cols=grid_shape[1])
    if grid_shape is not None and grid_shape[0] * grid_shape[1] != args.atoms:
        raise UsageError(f"grid {grid_shape} does not hold {args.atoms} atoms")
    if args.atom_rank is not None and patch_shape is None:
        raise UsageError("--atom-rank requires unwhitened patch training")

    cfg = learning.TrainConfig(
        eta0=args.eta0, epochs=args.epochs, samples_per_epoch=args.per_epoch,
        model=model, atom_sigma=args.atom_sigma, atom_rank=args.atom_rank,
        noise_std0=args.noise_std0, noise_decay=args.noise_decay, seed=args.seed)
    dictionary = learning.train(patches, args.atoms, cfg,
                                patch_shape=patch_shape, grid_shape=grid_shape)
    learning.save_dictionary(dictionary, args.out)


def _cmd_reconstruct(args) -> None:
    dictionary = learning.load_dictionary(args.dict_path)
    img = imaging.read_pgm(args.in_path)
    cfg = reconstruct.InferenceConfig(sigma_i=args.sigma_i, max_iters=args.iters)
    out = reconstruct.reconstruct_image(dictionary, img, args.block, cfg,
                                        threads=args.threads)
    imaging.write_pgm(args.out, out)


def _cmd_corrupt(args) -> None:
    img = imaging.read_pgm(args.in_path)
    rng = np.random.Generator(np.random.Philox(args.seed))
    imaging.write_pgm(args.out, imaging.add_gaussian_noise(img, args.std, rng))


def _cmd_metrics(args) -> None:
    a = imaging.read_pgm(args.a)
    b = imaging.read_pgm(args.b)
    print(f"psnr_db={imaging.psnr(a, b)} ssim={imaging.ssim(a, b)}")


def _cmd_bench_solvers(args) -> None:
    records = bench.bench_solvers(args.n_list, args.sigma, args.trials, args.seed)
    bench.write_csv(records, args.out)


def _cmd_bench_timing(args) -> None:
    records = bench.bench_timing(args.n_list, args.algorithms, args.trials,
                                 args.sigma_pre, args.sigma, args.seed, reps=args.reps)
    bench.write_csv(records, args.out)


_COMMANDS = {
    "project": _cmd_project,
    "train": _cmd_train,
    "reconstruct": _cmd_reconstruct,
    "corrupt": _cmd_corrupt,
    "metrics": _cmd_metrics,
    "bench-solvers": _cmd_bench_solvers,
    "bench-timing": _cmd_bench_timing,
}


def dispatch(argv) -> int:
    """Parse ``argv`` and run the named subcommand; returns the exit code."""
    parser, children = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("no subcommand given (see --help)")
        _merge_config(args, children[args.command]._actions, args.command)
    except UsageError as exc:
        print(f"ezdl: usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ezdl: usage error: {exc}", file=sys.stderr)
        return 1
    except (EzdlError, MalformedDictionaryFile, OSError) as exc:
        print(f"ezdl: error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
