"""Dataset generation and file ingestion.

Formats handled here:

* toy generators (center / circles / moons / centers), seeded with numpy's
  PCG64 so output is platform-independent and bit-reproducible;
* IDX image/label files (big-endian, the handwritten-digits interchange
  format), pixels scaled to [0, 1] and flattened row-major;
* labeled CSV with a header containing a "label" column;
* AVEC, this project's little-endian binary vector container:
  magic "AVEC", u32 version=1, u32 n, u32 d, u32 has_labels,
  n*d f32 features row-major, then n u32 labels when present.

Vectors are f32 on disk and f64 in memory.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import PointSet

__all__ = [
    "LabeledVectors",
    "ToySpec",
    "ParseError",
    "gen_toy",
    "load_idx",
    "load_csv",
    "save_csv",
    "load_avec",
    "save_avec",
    "TOY_KINDS",
]

TOY_KINDS = ("center", "circles", "moons", "centers")

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
AVEC_MAGIC = b"AVEC"
AVEC_VERSION = 1


class ParseError(ValueError):
    """Malformed input file; the message pinpoints where parsing failed."""


@dataclass(frozen=True)
class LabeledVectors:
    """A point set with one integer class label per row."""

    vectors: PointSet
    labels: np.ndarray
    class_names: tuple[str, ...] | None = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if labels.shape[0] != self.vectors.n:
            raise ValueError(
                f"{self.vectors.n} rows but {labels.shape[0]} labels"
            )
        if labels.size and labels.min() < 0:
            raise ValueError("labels must be nonnegative")
        labels = labels.copy()
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def class_rows(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)


@dataclass(frozen=True)
class ToySpec:
    """Recipe for one of the 2D toy datasets."""

    kind: str
    n: int = 200
    noise: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.kind not in TOY_KINDS:
            raise ValueError(f"unknown toy kind {self.kind!r}; expected one of {TOY_KINDS}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")


def _split_counts(n: int, parts: int) -> list[int]:
    base = n // parts
    counts = [base] * parts
    for i in range(n - base * parts):
        counts[i] += 1
    return counts


def gen_toy(spec: ToySpec) -> LabeledVectors:
    """Generate one of the four 2D toys, bit-reproducible per seed.

    center: one isotropic Gaussian blob (1 class).
    circles: two concentric rings, radii 1.0 and 0.5, plus isotropic noise
        (2 classes, outer first).
    moons: two interleaved half-circles of radius 1, vertical offset 0.5,
        plus isotropic noise (2 classes).
    centers: four Gaussian blobs with centers on the {0,4}^2 grid and
        standard deviation ``noise`` (4 classes), i.e. 4-sigma spacing at
        noise=1.
    """
    rng = np.random.default_rng(spec.seed)
    n, s = spec.n, spec.noise
    if spec.kind == "center":
        pts = rng.normal(0.0, 1.0, size=(n, 2)) * s if s > 0 else np.zeros((n, 2))
        labels = np.zeros(n, dtype=np.int64)
    elif spec.kind == "circles":
        counts = _split_counts(n, 2)
        rows, labels_list = [], []
        for cls, (count, radius) in enumerate(zip(counts, (1.0, 0.5))):
            theta = rng.uniform(0.0, 2.0 * np.pi, size=count)
            ring = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
            rows.append(ring + rng.normal(0.0, 1.0, size=(count, 2)) * s)
            labels_list.append(np.full(count, cls, dtype=np.int64))
        pts = np.vstack(rows)
        labels = np.concatenate(labels_list)
    elif spec.kind == "moons":
        counts = _split_counts(n, 2)
        t0 = rng.uniform(0.0, np.pi, size=counts[0])
        t1 = rng.uniform(0.0, np.pi, size=counts[1])
        upper = np.column_stack([np.cos(t0), np.sin(t0)])
        lower = np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)])
        pts = np.vstack([upper, lower]) + rng.normal(0.0, 1.0, size=(n, 2)) * s
        labels = np.concatenate(
            [np.zeros(counts[0], dtype=np.int64), np.ones(counts[1], dtype=np.int64)]
        )
    else:  # centers
        blob_centers = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [4.0, 4.0]])
        counts = _split_counts(n, 4)
        rows, labels_list = [], []
        for cls, count in enumerate(counts):
            rows.append(blob_centers[cls] + rng.normal(0.0, 1.0, size=(count, 2)) * s)
            labels_list.append(np.full(count, cls, dtype=np.int64))
        pts = np.vstack(rows)
        labels = np.concatenate(labels_list)
    return LabeledVectors(vectors=PointSet(pts), labels=labels)


def _read_exact(f, count: int, path, what: str) -> bytes:
    data = f.read(count)
    if len(data) != count:
        raise ParseError(
            f"{path}: truncated while reading {what}: expected {count} bytes, got {len(data)}"
        )
    return data


def load_idx(images_path, labels_path, limit: int | None = None) -> LabeledVectors:
    """Load an IDX image/label file pair.

    Big-endian headers; image magic 0x00000803, label magic 0x00000801.
    Pixels come back scaled to [0, 1], one flattened row per image. A
    ``limit`` keeps only the first ``limit`` items.
    """
    images_path, labels_path = Path(images_path), Path(labels_path)
    with open(images_path, "rb") as f:
        magic, count, rows, cols = struct.unpack(">iiii", _read_exact(f, 16, images_path, "image header"))
        if magic != IDX_IMAGE_MAGIC:
            raise ParseError(
                f"{images_path}: bad image magic 0x{magic:08x} at offset 0, expected 0x{IDX_IMAGE_MAGIC:08x}"
            )
        take = count if limit is None else min(limit, count)
        raw = _read_exact(f, take * rows * cols, images_path, f"{take} images")
        images = np.frombuffer(raw, dtype=np.uint8).reshape(take, rows * cols)
    with open(labels_path, "rb") as f:
        magic, lcount = struct.unpack(">ii", _read_exact(f, 8, labels_path, "label header"))
        if magic != IDX_LABEL_MAGIC:
            raise ParseError(
                f"{labels_path}: bad label magic 0x{magic:08x} at offset 0, expected 0x{IDX_LABEL_MAGIC:08x}"
            )
        if lcount != count:
            raise ParseError(
                f"count mismatch: {images_path} has {count} images but {labels_path} has {lcount} labels"
            )
        raw = _read_exact(f, take, labels_path, f"{take} labels")
        labels = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)
    return LabeledVectors(
        vectors=PointSet(images.astype(np.float64) / 255.0), labels=labels
    )


def save_idx(data: LabeledVectors, images_path, labels_path, rows: int, cols: int):
    """Write an IDX pair from vectors already scaled to [0, 1]."""
    if data.vectors.d != rows * cols:
        raise ValueError(f"vectors have d={data.vectors.d}, expected {rows}x{cols}")
    pix = np.clip(np.rint(data.vectors.points * 255.0), 0, 255).astype(np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">iiii", IDX_IMAGE_MAGIC, data.vectors.n, rows, cols))
        f.write(pix.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">ii", IDX_LABEL_MAGIC, data.vectors.n))
        f.write(data.labels.astype(np.uint8).tobytes())


def load_csv(path) -> LabeledVectors:
    """Load labeled vectors from a headered CSV with a "label" column."""
    path = Path(path)
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if "label" not in header:
            raise ParseError(f"{path}: header has no 'label' column (saw {header})")
        label_col = header.index("label")
        feat_cols = [i for i in range(len(header)) if i != label_col]
        feats, labels = [], []
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: row {rownum} has {len(row)} cells, header has {len(header)}"
                )
            try:
                labels.append(int(row[label_col]))
            except ValueError:
                raise ParseError(
                    f"{path}: row {rownum}, column '{header[label_col]}': "
                    f"non-integer label {row[label_col]!r}"
                ) from None
            vals = []
            for i in feat_cols:
                try:
                    vals.append(float(row[i]))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {rownum}, column '{header[i]}': "
                        f"non-numeric value {row[i]!r}"
                    ) from None
            feats.append(vals)
    if not feats:
        raise ParseError(f"{path}: no data rows")
    return LabeledVectors(
        vectors=PointSet(np.array(feats, dtype=np.float64)),
        labels=np.array(labels, dtype=np.int64),
    )


def save_csv(data: LabeledVectors, path):
    path = Path(path)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["label"] + [f"f{i}" for i in range(data.vectors.d)])
        for label, row in zip(data.labels, data.vectors.points):
            writer.writerow([int(label)] + [repr(float(v)) for v in row])


def load_avec(path) -> LabeledVectors:
    """Load an AVEC binary vector file (see module docstring for layout)."""
    path = Path(path)
    with open(path, "rb") as f:
        head = _read_exact(f, 4, path, "magic")
        if head != AVEC_MAGIC:
            raise ParseError(f"{path}: bad magic {head!r} at offset 0, expected {AVEC_MAGIC!r}")
        version, n, d, has_labels = struct.unpack("<IIII", _read_exact(f, 16, path, "header"))
        if version != AVEC_VERSION:
            raise ParseError(f"{path}: unsupported version {version}, expected {AVEC_VERSION}")
        raw = _read_exact(f, n * d * 4, path, f"{n}x{d} f32 features")
        feats = np.frombuffer(raw, dtype="<f4").reshape(n, d).astype(np.float64)
        if has_labels:
            raw = _read_exact(f, n * 4, path, f"{n} u32 labels")
            labels = np.frombuffer(raw, dtype="<u4").astype(np.int64)
        else:
            labels = np.zeros(n, dtype=np.int64)
    return LabeledVectors(vectors=PointSet(feats), labels=labels)


def save_avec(data: LabeledVectors, path, with_labels: bool = True):
    """Write an AVEC file; features are stored as little-endian f32."""
    path = Path(path)
    with open(path, "wb") as f:
        f.write(AVEC_MAGIC)
        f.write(struct.pack("<IIII", AVEC_VERSION, data.vectors.n, data.vectors.d, int(with_labels)))
        f.write(data.vectors.points.astype("<f4").tobytes())
        if with_labels:
            f.write(data.labels.astype("<u4").tobytes())


def load_vectors(path) -> LabeledVectors:
    """Dispatch on extension: .avec or .csv."""
    path = Path(path)
    if path.suffix == ".avec":
        return load_avec(path)
    if path.suffix == ".csv":
        return load_csv(path)
    raise ParseError(f"{path}: unrecognized vector file extension {path.suffix!r}")
