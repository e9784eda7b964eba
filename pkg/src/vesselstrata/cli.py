"""Batch front door: dataset scanning and the pipeline subcommands.

Subcommands: ``stratify``, ``fuse``, ``evaluate``, ``eval-loss``, ``synth``,
``bench``. Configuration comes from flags, optionally seeded by a plain
``key=value`` file (flags win); every run that owns an output directory
writes the resolved configuration into ``<out>/run.cfg``. All file outputs
go through atomic temp-then-rename writes, errors exit nonzero with a
one-line ``error: ...`` message on stderr, and reruns are byte-identical.

Dataset layouts (files must already be PNG or PNM; see README for the
one-time conversion step):

* drive:    <root>/images/NN_*.png, <root>/1st_manual/NN_manual*.png,
            optional <root>/mask/NN_*_mask.png (FOV); ids are the leading
            digits.
* stare:    <root>/<images-dir>/imNNNN.png plus an explicit annotator
            directory such as labels-ah (there is no default annotator).
* chasedb1: flat <root>/Image_<id>.png with Image_<id>_<annotator>HO.png.
* custom:   <root>/images/<id>.png, <root>/masks/<id>.png, optional
            <root>/fov/<id>.png, paired by identical stem.
"""

from __future__ import annotations

import argparse
import csv
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import ORIENTATIONS, PixelCoord, TubeSpec, discrete_frechet, make_tube, verify_erasure
from .losses import LossWeights, cgan_loss, composite_objective, l1_residual, loss_gen, loss_thin
from .metrics import evaluate_image, write_csv
from .morphology import opening
from .raster import load_image, save_gray, save_mask
from .stratification import ThresholdLadder, fuse, fuse_soft, stack3, stratify

DATASET_KINDS = ("drive", "stare", "chasedb1", "custom")
IMAGE_SUFFIXES = (".png", ".pgm", ".ppm", ".pnm")


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    image_path: Path
    mask_path: Path
    fov_path: Path | None = None


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    root: Path
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate manifest ids: {', '.join(dupes)}")
        for e in self.entries:
            for p in (e.image_path, e.mask_path, e.fov_path):
                if p is not None and not Path(p).is_file():
                    raise ValueError(f"manifest entry {e.id}: missing file {p}")

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class RunConfig:
    """User-facing knobs shared by the subcommands."""

    ladder: ThresholdLadder = ThresholdLadder((2,))
    weights: LossWeights = LossWeights()
    fuse_threshold: int = 127
    fov_mode: bool = False
    output_dir: Path | None = None
    jobs: int = 1

    def __post_init__(self):
        if int(self.fuse_threshold) != self.fuse_threshold or not 0 <= int(self.fuse_threshold) <= 255:
            raise ValueError(f"threshold must be an integer in [0, 255], got {self.fuse_threshold!r}")
        if int(self.jobs) != self.jobs or int(self.jobs) < 1:
            raise ValueError(f"jobs must be an integer >= 1, got {self.jobs!r}")
        object.__setattr__(self, "fuse_threshold", int(self.fuse_threshold))
        object.__setattr__(self, "jobs", int(self.jobs))
        if self.output_dir is not None:
            object.__setattr__(self, "output_dir", Path(self.output_dir))


# ---------------------------------------------------------------------------
# dataset scanning


def _list_images(directory: Path) -> list[Path]:
    if not directory.is_dir():
        raise ValueError(f"missing directory: {directory}")
    files = sorted(p for p in directory.iterdir()
                   if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
    return files


def _fail_scan(kind: str, problems: list[str]):
    raise ValueError(f"{kind} scan failed: " + "; ".join(problems))


def _index_by(files: list[Path], pattern: str, kind: str, problems: list[str]) -> dict[str, Path]:
    out: dict[str, Path] = {}
    rx = re.compile(pattern)
    for f in files:
        m = rx.match(f.name)
        if not m:
            problems.append(f"unrecognized {kind} file name {f.name!r}")
            continue
        out[m.group(1)] = f
    return out


def _scan_drive(root: Path) -> list[ManifestEntry]:
    problems: list[str] = []
    images = _index_by(_list_images(root / "images"), r"(\d+)_", "image", problems)
    masks = _index_by(_list_images(root / "1st_manual"), r"(\d+)_manual", "mask", problems)
    fov_dir = root / "mask"
    fovs = _index_by(_list_images(fov_dir), r"(\d+)_.*_mask", "fov", problems) \
        if fov_dir.is_dir() else {}
    entries = []
    for image_id in sorted(images):
        mask = masks.pop(image_id, None)
        if mask is None:
            problems.append(f"image {image_id} has no mask")
            continue
        fov = fovs.get(image_id)
        if fov_dir.is_dir() and fov is None:
            problems.append(f"image {image_id} has no fov mask")
            continue
        entries.append(ManifestEntry(image_id, images[image_id], mask, fov))
    for orphan in sorted(masks):
        problems.append(f"mask {orphan} has no image")
    if problems:
        _fail_scan("drive", problems)
    return entries


def _scan_stare(root: Path, annotator: str | None) -> list[ManifestEntry]:
    if not annotator:
        raise ValueError(
            "stare requires an explicit annotator directory (e.g. --annotator labels-ah)"
        )
    image_dir = next((root / d for d in ("stare-images", "images") if (root / d).is_dir()), None)
    if image_dir is None:
        raise ValueError(f"missing directory: {root / 'stare-images'} (or {root / 'images'})")
    problems: list[str] = []
    images = _index_by(_list_images(image_dir), r"(im\d+)\.", "image", problems)
    masks = _index_by(_list_images(root / annotator), r"(im\d+)\.", "mask", problems)
    entries = []
    for image_id in sorted(images):
        mask = masks.pop(image_id, None)
        if mask is None:
            problems.append(f"image {image_id} has no mask")
            continue
        entries.append(ManifestEntry(image_id, images[image_id], mask))
    for orphan in sorted(masks):
        problems.append(f"mask {orphan} has no image")
    if problems:
        _fail_scan("stare", problems)
    return entries


def _scan_chase(root: Path, annotator: str) -> list[ManifestEntry]:
    problems: list[str] = []
    files = _list_images(root)
    images: dict[str, Path] = {}
    masks: dict[str, Path] = {}
    img_rx = re.compile(r"Image_(\w+?)\.\w+$")
    mask_rx = re.compile(rf"Image_(\w+?)_{re.escape(annotator)}\.\w+$")
    for f in files:
        m = mask_rx.match(f.name)
        if m:
            masks[m.group(1)] = f
            continue
        m = img_rx.match(f.name)
        if m and "HO" not in m.group(1):
            images[m.group(1)] = f
    if not images:
        raise ValueError(f"no chasedb1 images found under {root}")
    entries = []
    for image_id in sorted(images):
        mask = masks.pop(image_id, None)
        if mask is None:
            problems.append(f"image {image_id} has no {annotator} mask")
            continue
        entries.append(ManifestEntry(image_id, images[image_id], mask))
    if problems:
        _fail_scan("chasedb1", problems)
    return entries


def _scan_custom(root: Path) -> list[ManifestEntry]:
    problems: list[str] = []
    images = {p.stem: p for p in _list_images(root / "images")}
    masks = {p.stem: p for p in _list_images(root / "masks")}
    fov_dir = root / "fov"
    fovs = {p.stem: p for p in _list_images(fov_dir)} if fov_dir.is_dir() else {}
    entries = []
    for image_id in sorted(images):
        mask = masks.pop(image_id, None)
        if mask is None:
            problems.append(f"image {image_id} has no mask")
            continue
        entries.append(ManifestEntry(image_id, images[image_id], mask, fovs.get(image_id)))
    for orphan in sorted(masks):
        problems.append(f"mask {orphan} has no image")
    if problems:
        _fail_scan("custom", problems)
    return entries


def scan_dataset(root, name: str, annotator: str | None = None) -> DatasetManifest:
    """Pair images with ground-truth masks under one of the known layouts."""
    root = Path(root)
    if not root.is_dir():
        raise ValueError(f"dataset root does not exist: {root}")
    if name not in DATASET_KINDS:
        raise ValueError(f"unknown dataset kind {name!r} (expected one of {DATASET_KINDS})")
    if name == "drive":
        entries = _scan_drive(root)
    elif name == "stare":
        entries = _scan_stare(root, annotator)
    elif name == "chasedb1":
        entries = _scan_chase(root, annotator or "1stHO")
    else:
        entries = _scan_custom(root)
    if not entries:
        raise ValueError(f"no image/mask pairs found under {root}")
    return DatasetManifest(name=name, root=root, entries=tuple(entries))


def filter_ids(manifest: DatasetManifest, ids) -> DatasetManifest:
    """Restrict a manifest to an explicit id list (an arbitrary user split)."""
    wanted = list(ids)
    known = {e.id: e for e in manifest.entries}
    missing = [i for i in wanted if i not in known]
    if missing:
        raise ValueError(f"ids not in manifest: {', '.join(missing)}")
    entries = tuple(known[i] for i in sorted(set(wanted)))
    return DatasetManifest(name=manifest.name, root=manifest.root, entries=entries)


# ---------------------------------------------------------------------------
# shared plumbing


def _map_jobs(fn, items, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_run_cfg(outdir: Path, config: RunConfig, command: str, extra: dict | None = None) -> None:
    lines = [
        f"command={command}",
        f"ladder={','.join(str(t) for t in config.ladder.thresholds)}",
        f"weights={','.join(format(w, 'g') for w in config.weights.w)}",
        f"lambda={config.weights.lam:g}",
        f"threshold={config.fuse_threshold}",
        f"fov={'on' if config.fov_mode else 'off'}",
        f"jobs={config.jobs}",
    ]
    for key, value in sorted((extra or {}).items()):
        lines.append(f"{key}={value}")
    _atomic_write_text(outdir / "run.cfg", "\n".join(lines) + "\n")


def _require_out(config: RunConfig) -> Path:
    if config.output_dir is None:
        raise ValueError("an output directory is required (use --out)")
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _stratum_names(ladder: ThresholdLadder) -> list[str]:
    if len(ladder.thresholds) == 1:
        return ["thin", "stem"]
    return [f"stratum{c}" for c in range(ladder.strata_count)]


# ---------------------------------------------------------------------------
# subcommand bodies (callable directly from tests)


def cmd_stratify(manifest: DatasetManifest, config: RunConfig) -> Path:
    """Write per-image strata PNGs plus a pixel-count summary CSV."""
    outdir = _require_out(config)
    _write_run_cfg(outdir, config, "stratify", {"dataset": manifest.name, "root": manifest.root})
    names = _stratum_names(config.ladder)

    def work(entry: ManifestEntry):
        y = load_image(entry.mask_path, binary=True)
        stack = stratify(y, config.ladder)
        for name, stratum in zip(names, stack.strata):
            save_mask(stratum, outdir / f"{entry.id}_{name}.png")
        save_mask(y, outdir / f"{entry.id}_raw.png")
        return [entry.id] + [int(s.sum()) for s in stack.strata] + [int(y.sum())]

    rows = _map_jobs(work, manifest.entries, config.jobs)
    summary_path = outdir / "stratify_summary.csv"
    out = ["image," + ",".join(names) + ",raw"]
    out += [",".join(str(v) for v in row) for row in rows]
    _atomic_write_text(summary_path, "\n".join(out) + "\n")
    return outdir


def cmd_fuse(map_paths, config: RunConfig) -> Path:
    """Fuse prediction maps: binary OR-fusion plus the soft max map."""
    if not map_paths:
        raise ValueError("fuse needs at least one prediction map")
    outdir = _require_out(config)
    _write_run_cfg(outdir, config, "fuse", {"maps": ";".join(str(p) for p in map_paths)})
    maps = [load_image(p) for p in map_paths]
    save_mask(fuse(maps, config.fuse_threshold), outdir / "fused.png")
    save_gray(fuse_soft(maps), outdir / "fused_soft.png")
    return outdir


def cmd_evaluate(manifest: DatasetManifest, predictions, config: RunConfig) -> Path:
    """Score predictions against a manifest and write the evaluation CSV.

    Per id the predictions directory must hold ``<id>_bin.png`` (binary
    decision) and ``<id>_soft.png`` (8-bit score map for the ROC sweep).
    """
    predictions = Path(predictions)
    outdir = _require_out(config)
    _write_run_cfg(outdir, config, "evaluate",
                   {"dataset": manifest.name, "root": manifest.root, "predictions": predictions})

    def work(entry: ManifestEntry):
        bin_path = predictions / f"{entry.id}_bin.png"
        soft_path = predictions / f"{entry.id}_soft.png"
        for p in (bin_path, soft_path):
            if not p.is_file():
                raise ValueError(f"missing prediction for id {entry.id}: {p}")
        fov = None
        if config.fov_mode:
            if entry.fov_path is None:
                raise ValueError(f"fov mode is on but id {entry.id} has no fov mask")
            fov = load_image(entry.fov_path, binary=True)
        truth = load_image(entry.mask_path, binary=True)
        return evaluate_image(
            entry.id,
            load_image(bin_path, binary=True),
            truth,
            soft=load_image(soft_path),
            fov=fov,
            fov_mode=config.fov_mode,
        )

    reports = _map_jobs(work, manifest.entries, config.jobs)
    write_csv(reports, outdir / "evaluation.csv")
    return outdir


def cmd_synth(spec: TubeSpec, config: RunConfig, sweep_max: int = 8) -> Path:
    """Emit a synthetic tube mask plus a sidecar with diameter and erasure sweep."""
    outdir = _require_out(config)
    _write_run_cfg(outdir, config, "synth", {
        "orientation": spec.orientation, "width": spec.width, "length": spec.length,
    })
    mask, border_a, border_b = make_tube(spec)
    save_mask(mask, outdir / "tube.png")
    diameter = discrete_frechet(border_a, border_b)
    lines = [
        f"orientation={spec.orientation}",
        f"width={spec.width}",
        f"length={spec.length}",
        f"origin={spec.origin.row},{spec.origin.col}",
        f"canvas={spec.canvas[0]},{spec.canvas[1]}",
        f"diameter={diameter}",
    ]
    for d in range(1, sweep_max + 1):
        report = verify_erasure(spec, d)
        lines.append(
            f"sweep d={d} k={d + 1} erased={int(report.erased)}"
            f" survived_intact={int(report.survived_intact)}"
        )
    _atomic_write_text(outdir / "tube_report.txt", "\n".join(lines) + "\n")
    return outdir


BENCH_COLUMNS = ("height", "width", "k", "reps", "naive_seconds", "separable_seconds", "speedup")


def run_bench(sizes, kernels, reps: int = 10, seed: int = 20240214) -> list[dict]:
    """Time naive vs separable opening; outputs are checked identical first.

    Returns one row per (size, kernel): mean seconds per repetition for each
    engine and the naive/separable speedup factor.
    """
    if int(reps) != reps or int(reps) < 1:
        raise ValueError(f"reps must be an integer >= 1, got {reps!r}")
    rng = np.random.default_rng(seed)
    rows = []
    for height, width in sizes:
        mask = (rng.random((height, width)) < 0.35).astype(np.uint8)
        for k in kernels:
            base = opening(mask, k, mode="naive")
            if not np.array_equal(base, opening(mask, k, mode="separable")):
                raise RuntimeError(f"engine mismatch at {height}x{width}, k={k}")
            timings = {}
            for mode in ("naive", "separable"):
                start = time.perf_counter()
                for _ in range(int(reps)):
                    opening(mask, k, mode=mode)
                timings[mode] = (time.perf_counter() - start) / int(reps)
            rows.append({
                "height": height,
                "width": width,
                "k": k,
                "reps": int(reps),
                "naive_seconds": timings["naive"],
                "separable_seconds": timings["separable"],
                "speedup": timings["naive"] / timings["separable"],
            })
    return rows


def write_bench_csv(rows, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(BENCH_COLUMNS)
    for row in rows:
        writer.writerow([
            row["height"], row["width"], row["k"], row["reps"],
            f"{row['naive_seconds']:.6f}", f"{row['separable_seconds']:.6f}",
            f"{row['speedup']:.2f}",
        ])


def cmd_eval_loss(pred_paths, mask_path, config: RunConfig, pred_thin=None,
                  scores_real=None, scores_fake=None) -> dict[str, float]:
    """Score prediction maps against the stratified target of one mask.

    Maps are rescaled from [0, 255] to [0, 1]; the target is the
    thin/stem/raw stack built from the mask with the first ladder threshold.
    Returns the computed values keyed by name.
    """
    if len(pred_paths) != 3:
        raise ValueError(f"eval-loss expects 3 prediction maps (thin, stem, raw), got {len(pred_paths)}")
    y = load_image(mask_path, binary=True)
    target = stack3(y, config.ladder.thresholds[0])
    pred = np.stack([load_image(p).astype(np.float64) / 255.0 for p in pred_paths])
    values: dict[str, float] = {
        "loss_gen": loss_gen(pred, target, config.weights),
        "l1": l1_residual(pred, target),
    }
    if pred_thin is not None:
        thin_map = load_image(pred_thin).astype(np.float64) / 255.0
        values["loss_thin"] = loss_thin(thin_map, target.strata[0])
    if scores_real is not None and scores_fake is not None:
        values["cgan"] = cgan_loss(scores_real, scores_fake)
        values["composite"] = composite_objective(values["cgan"], values["l1"], config.weights)
    return values


# ---------------------------------------------------------------------------
# argument parsing


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise ValueError(f"bad number list {text!r}: {exc}") from exc


def _parse_size(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)x(\d+)", text.strip())
    if not m:
        raise ValueError(f"bad size {text!r} (expected WIDTHxHEIGHT, e.g. 565x584)")
    width, height = int(m.group(1)), int(m.group(2))
    return height, width


def _parse_coord(text: str) -> tuple[int, int]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ValueError(f"bad coordinate {text!r} (expected row,col)")
    return int(parts[0]), int(parts[1])


CONFIG_KEYS = ("d1", "ladder", "weights", "lambda", "threshold", "fov", "jobs", "out")


def _read_config_file(path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        if key not in CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _resolve(args, file_values: dict[str, str], key: str, default: str | None) -> str | None:
    attr = "lambda_" if key == "lambda" else key.replace("-", "_")
    flag = getattr(args, attr, None)
    if flag is not None:
        return flag
    if key in file_values:
        return file_values[key]
    return default


def build_config(args) -> RunConfig:
    """Resolve flags over config-file values over defaults into a RunConfig."""
    file_values = _read_config_file(args.config) if getattr(args, "config", None) else {}
    ladder_text = _resolve(args, file_values, "ladder", None)
    if ladder_text is None:
        d1_text = _resolve(args, file_values, "d1", "2")
        ladder = ThresholdLadder((int(d1_text),))
    else:
        ladder = ThresholdLadder.parse(ladder_text)
    weights = LossWeights(
        w=_parse_floats(_resolve(args, file_values, "weights", "1,1,1")),
        lam=float(_resolve(args, file_values, "lambda", "100")),
    )
    fov_text = _resolve(args, file_values, "fov", "off")
    if fov_text not in ("on", "off"):
        raise ValueError(f"fov must be 'on' or 'off', got {fov_text!r}")
    out_text = _resolve(args, file_values, "out", None)
    return RunConfig(
        ladder=ladder,
        weights=weights,
        fuse_threshold=int(_resolve(args, file_values, "threshold", "127")),
        fov_mode=fov_text == "on",
        output_dir=Path(out_text) if out_text else None,
        jobs=int(_resolve(args, file_values, "jobs", "1")),
    )


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file; flags override it")
    parser.add_argument("--d1", help="single thickness threshold (default 2)")
    parser.add_argument("--ladder", help="comma-separated thresholds, overrides --d1")
    parser.add_argument("--weights", help="per-stratum weights w0,w1,w2 (default 1,1,1)")
    parser.add_argument("--lambda", dest="lambda_", help="L1 factor (default 100)")
    parser.add_argument("--threshold", help="binarization threshold 0..255 (default 127)")
    parser.add_argument("--fov", choices=("on", "off"), help="restrict metrics to the FOV mask")
    parser.add_argument("--jobs", help="parallel worker count (default 1)")
    parser.add_argument("--out", help="output directory")


def _dataset_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", required=True, choices=DATASET_KINDS)
    parser.add_argument("--root", required=True, help="dataset root directory")
    parser.add_argument("--annotator", help="annotator directory (stare) or suffix (chasedb1)")
    parser.add_argument("--ids", help="file with one id per line restricting the manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vesselstrata",
        description="Stratify vessel masks by thickness, fuse prediction maps, and evaluate segmentations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stratify", help="write thickness strata for every mask in a dataset")
    _dataset_flags(p)
    _add_common_flags(p)
    p.set_defaults(handler=_handle_stratify)

    p = sub.add_parser("fuse", help="binarize and OR prediction maps (plus soft max map)")
    p.add_argument("maps", nargs="+", help="prediction map files")
    _add_common_flags(p)
    p.set_defaults(handler=_handle_fuse)

    p = sub.add_parser("evaluate", help="score binary+soft predictions against a dataset")
    _dataset_flags(p)
    p.add_argument("--predictions", required=True, help="directory with <id>_bin.png and <id>_soft.png")
    _add_common_flags(p)
    p.set_defaults(handler=_handle_evaluate)

    p = sub.add_parser("eval-loss", help="evaluate the loss formulas on saved maps")
    p.add_argument("--pred", nargs=3, required=True, metavar=("THIN", "STEM", "RAW"),
                   help="three prediction maps")
    p.add_argument("--mask", required=True, help="ground-truth mask")
    p.add_argument("--pred-thin", help="thin-stream prediction map")
    p.add_argument("--scores-real", help="comma-separated discriminator scores on real pairs")
    p.add_argument("--scores-fake", help="comma-separated discriminator scores on generated pairs")
    _add_common_flags(p)
    p.set_defaults(handler=_handle_eval_loss)

    p = sub.add_parser("synth", help="generate a synthetic tube with its diameter report")
    p.add_argument("--orientation", required=True, choices=ORIENTATIONS)
    p.add_argument("--width", required=True, type=int)
    p.add_argument("--length", required=True, type=int)
    p.add_argument("--origin", default="0,0", help="row,col of the tube's top-left pixel")
    p.add_argument("--canvas", help="canvas height,width (default: tight fit)")
    p.add_argument("--sweep-max", type=int, default=8, help="largest d in the erasure sweep")
    _add_common_flags(p)
    p.set_defaults(handler=_handle_synth)

    p = sub.add_parser("bench", help="time naive vs separable opening")
    p.add_argument("--sizes", default="565x584", help="comma-separated WIDTHxHEIGHT list")
    p.add_argument("--kernels", default="1,3,7,15", help="comma-separated kernel sides")
    p.add_argument("--reps", type=int, default=10)
    _add_common_flags(p)
    p.set_defaults(handler=_handle_bench)

    return parser


def _scan_from_args(args) -> DatasetManifest:
    manifest = scan_dataset(args.root, args.dataset, annotator=args.annotator)
    if args.ids:
        ids = [line.strip() for line in Path(args.ids).read_text().splitlines() if line.strip()]
        manifest = filter_ids(manifest, ids)
    return manifest


def _handle_stratify(args) -> int:
    cmd_stratify(_scan_from_args(args), build_config(args))
    return 0


def _handle_fuse(args) -> int:
    cmd_fuse([Path(p) for p in args.maps], build_config(args))
    return 0


def _handle_evaluate(args) -> int:
    cmd_evaluate(_scan_from_args(args), args.predictions, build_config(args))
    return 0


def _handle_eval_loss(args) -> int:
    config = build_config(args)
    values = cmd_eval_loss(
        [Path(p) for p in args.pred],
        Path(args.mask),
        config,
        pred_thin=Path(args.pred_thin) if args.pred_thin else None,
        scores_real=_parse_floats(args.scores_real) if args.scores_real else None,
        scores_fake=_parse_floats(args.scores_fake) if args.scores_fake else None,
    )
    for key, value in values.items():
        print(f"{key}={value:.6f}")
    return 0


def _handle_synth(args) -> int:
    spec = TubeSpec(
        orientation=args.orientation,
        width=args.width,
        length=args.length,
        origin=PixelCoord(*_parse_coord(args.origin)),
        canvas=_parse_coord(args.canvas) if args.canvas else None,
    )
    cmd_synth(spec, build_config(args), sweep_max=args.sweep_max)
    return 0


def _handle_bench(args) -> int:
    sizes = [_parse_size(s) for s in args.sizes.split(",") if s.strip()]
    kernels = [int(k) for k in args.kernels.split(",") if k.strip()]
    rows = run_bench(sizes, kernels, reps=args.reps)
    config = build_config(args)
    if config.output_dir is not None:
        outdir = _require_out(config)
        with open(outdir / "bench.csv", "w", newline="") as fh:
            write_bench_csv(rows, fh)
    write_bench_csv(rows, sys.stdout)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
