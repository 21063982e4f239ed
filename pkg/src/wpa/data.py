"""Training data: synthetic circle grids and MNIST IDX ingestion.

Grid samples are vectorized row-major, pixel (alpha, beta) -> index
M*alpha + beta with 0-based coordinates; round-tripping through a (M, M)
reshape is the identity. Targets are +1 on the label output and -1
elsewhere.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

IDX_IMAGES_MAGIC = 2051
IDX_LABELS_MAGIC = 2049


class DataError(ValueError):
    """Raised for unreadable or inconsistent data files/geometry."""


@dataclass
class Dataset:
    inputs: np.ndarray                      # (P, N0) float64
    class_of: np.ndarray                    # (P,) int, values in [0, NL)
    targets: np.ndarray                     # (P, NL) float64, +1/-1
    geometry: tuple[int, int] | None = None
    zones: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.inputs = np.ascontiguousarray(self.inputs, dtype=np.float64)
        self.class_of = np.asarray(self.class_of, dtype=np.int64)
        self.targets = np.ascontiguousarray(self.targets, dtype=np.float64)
        P = self.inputs.shape[0]
        if self.class_of.shape != (P,) or self.targets.shape[0] != P:
            raise ValueError("sample counts disagree")
        n_out = self.targets.shape[1]
        if np.any((self.class_of < 0) | (self.class_of >= n_out)):
            raise ValueError("class index out of range")
        ok = (np.sum(self.targets == 1.0, axis=1) == 1) & \
             (np.sum(self.targets == -1.0, axis=1) == n_out - 1)
        if not np.all(ok):
            raise ValueError("each target row needs one +1 and -1 elsewhere")
        if self.geometry is not None:
            rows, cols = self.geometry
            if rows * cols != self.inputs.shape[1]:
                raise ValueError("geometry does not match input width")

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.targets.shape[1]


def targets_from_classes(class_of: np.ndarray, n_classes: int) -> np.ndarray:
    t = -np.ones((len(class_of), n_classes))
    t[np.arange(len(class_of)), class_of] = 1.0
    return t


# ------------------------------------------------------------ toy circles

VARIANTS = ("disjoint", "full_overlap", "partial_overlap")

_DEFAULT_CENTERS = {
    "disjoint": ((50, 20), (50, 50), (50, 80)),
    "full_overlap": ((50, 50), (50, 50), (50, 50)),
    "partial_overlap": ((50, 38), (50, 50), (50, 62)),
}


@dataclass(frozen=True)
class ToySpec:
    variant: str
    grid: int = 100
    radius: int = 14
    centers: tuple[tuple[int, int], ...] | None = None  # (row, col) each
    face_values: tuple[float, ...] = (1.0, 2.0, 3.0)
    ground_value: float = -1.0

    def resolved_centers(self) -> tuple[tuple[int, int], ...]:
        return self.centers or _DEFAULT_CENTERS[self.variant]


def _disk_mask(M: int, center: tuple[int, int], r: int) -> np.ndarray:
    rows = np.arange(M)[:, None]
    cols = np.arange(M)[None, :]
    return (rows - center[0]) ** 2 + (cols - center[1]) ** 2 <= r * r


def _check_variant(spec: ToySpec, faces: list[np.ndarray]) -> None:
    inter = [(a, b) for a in range(3) for b in range(a + 1, 3)]
    pair_counts = [np.sum(faces[a] & faces[b]) for a, b in inter]
    triple = np.sum(faces[0] & faces[1] & faces[2])
    if spec.variant == "disjoint":
        if any(c > 0 for c in pair_counts):
            raise DataError("disjoint variant has overlapping faces")
    elif spec.variant == "full_overlap":
        if not (np.array_equal(faces[0], faces[1])
                and np.array_equal(faces[0], faces[2])):
            raise DataError("full_overlap variant needs identical faces")
    else:
        unit = [faces[i] & ~(faces[(i + 1) % 3] | faces[(i + 2) % 3])
                for i in range(3)]
        if (any(c == 0 for c in pair_counts) or triple == 0
                or any(np.sum(u) == 0 for u in unit)):
            raise DataError("partial_overlap variant needs partial overlaps, "
                            "a triple-overlap center and nonempty unit zones")


def make_toy(variant: str, spec: ToySpec | None = None) -> Dataset:
    """Build the three-sample circle dataset for a variant.

    Sample m (0-based) paints face value face_values[m] on its disk and the
    ground value everywhere else. Zone masks: G (common ground), F1..F3
    (faces), plus F (variant full_overlap), unit zones F0_1..F0_3 and the
    triple-overlap `center` where the variant defines them.
    """
    if variant not in VARIANTS:
        raise DataError(f"unknown toy variant {variant!r}")
    spec = spec or ToySpec(variant)
    if spec.variant != variant:
        raise DataError("spec.variant disagrees with requested variant")
    M, r = spec.grid, spec.radius
    centers = spec.resolved_centers()
    for c in centers:
        if not (r <= c[0] < M - r and r <= c[1] < M - r):
            raise DataError(f"circle at {c} does not fit the grid")
    faces = [_disk_mask(M, c, r) for c in centers]
    _check_variant(spec, faces)

    union = faces[0] | faces[1] | faces[2]
    grids = []
    for m in range(3):
        g = np.full((M, M), spec.ground_value)
        g[faces[m]] = spec.face_values[m]
        grids.append(g.reshape(-1))

    zones = {"G": ~union, "F1": faces[0], "F2": faces[1], "F3": faces[2]}
    triple = faces[0] & faces[1] & faces[2]
    if variant == "full_overlap":
        zones["F"] = faces[0].copy()
        zones["center"] = triple
    elif variant == "partial_overlap":
        zones["center"] = triple
        for i in range(3):
            zones[f"F0_{i + 1}"] = faces[i] & ~(faces[(i + 1) % 3]
                                                | faces[(i + 2) % 3])

    class_of = np.arange(3)
    return Dataset(np.stack(grids), class_of,
                   targets_from_classes(class_of, 3),
                   geometry=(M, M), zones=zones)


# ------------------------------------------------------------------- IDX

def _read_raw(path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        import gzip
        raw = gzip.decompress(raw)
    return raw


def read_idx(path) -> np.ndarray:
    """Parse an IDX file of unsigned bytes (plain or gzipped) into an ndarray."""
    raw = _read_raw(path)
    if len(raw) < 4:
        raise DataError(f"{path}: truncated IDX header")
    zero, dtype_code, ndim = struct.unpack(">HBB", raw[:4])
    if zero != 0 or dtype_code != 0x08:
        raise DataError(f"{path}: bad IDX magic {raw[:4].hex()}")
    if len(raw) < 4 + 4 * ndim:
        raise DataError(f"{path}: truncated IDX dimensions")
    dims = struct.unpack(f">{ndim}l", raw[4:4 + 4 * ndim])
    count = int(np.prod(dims))
    payload = raw[4 + 4 * ndim:]
    if len(payload) != count:
        raise DataError(f"{path}: payload has {len(payload)} bytes, "
                        f"expected {count}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(dims)


def _magic_of(path) -> int:
    raw = _read_raw(path)[:4]
    if len(raw) < 4:
        raise DataError(f"{path}: truncated IDX header")
    return struct.unpack(">l", raw)[0]


@dataclass(frozen=True)
class MnistSource:
    images_path: str
    labels_path: str
    subset: int = 600          # training samples kept (after class filter)
    n_classes: int = 10        # keep digits 0..n_classes-1
    pixel_scale: float = 1.0 / 255.0

    def __post_init__(self):
        if self.n_classes not in (3, 5, 10):
            raise DataError("n_classes must be 3, 5 or 10")


def load_mnist_split(src: MnistSource, limit: int | None) -> Dataset:
    """Load one images/labels pair, filtered to classes < n_classes.

    limit: keep the first `limit` matching samples in file order
    (None = all matching samples).
    """
    images = read_idx(src.images_path)
    labels = read_idx(src.labels_path)
    if _magic_of(src.images_path) != IDX_IMAGES_MAGIC:
        raise DataError(f"{src.images_path}: not an IDX image file")
    if _magic_of(src.labels_path) != IDX_LABELS_MAGIC:
        raise DataError(f"{src.labels_path}: not an IDX label file")
    if images.ndim != 3:
        raise DataError(f"{src.images_path}: expected 3 dimensions")
    if labels.ndim != 1 or labels.shape[0] != images.shape[0]:
        raise DataError("image and label counts disagree")

    keep = np.flatnonzero(labels < src.n_classes)
    if limit is not None:
        keep = keep[:limit]
    if keep.size == 0:
        raise DataError("no samples left after class filtering")
    rows, cols = images.shape[1], images.shape[2]
    x = images[keep].reshape(len(keep), rows * cols) * src.pixel_scale
    y = labels[keep].astype(np.int64)
    return Dataset(x, y, targets_from_classes(y, src.n_classes),
                   geometry=(rows, cols))


def load_mnist(train_src: MnistSource,
               test_src: MnistSource | None = None) -> tuple[Dataset, Dataset | None]:
    """(train, test) datasets; train truncated to `subset` samples."""
    train = load_mnist_split(train_src, train_src.subset)
    test = load_mnist_split(test_src, None) if test_src else None
    return train, test


_MNIST_NAMES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def find_mnist_file(directory, role: str) -> Path:
    base = Path(directory) / _MNIST_NAMES[role]
    for cand in (base, base.with_name(base.name + ".gz")):
        if cand.exists():
            return cand
    raise DataError(f"missing {_MNIST_NAMES[role]}[.gz] in {directory}")


def load_mnist_dir(directory, subset: int = 600,
                   n_classes: int = 10) -> tuple[Dataset, Dataset]:
    """Load the standard four IDX files from one directory."""
    train_src = MnistSource(str(find_mnist_file(directory, "train_images")),
                            str(find_mnist_file(directory, "train_labels")),
                            subset=subset, n_classes=n_classes)
    test_src = MnistSource(str(find_mnist_file(directory, "test_images")),
                           str(find_mnist_file(directory, "test_labels")),
                           subset=subset, n_classes=n_classes)
    train, test = load_mnist(train_src, test_src)
    return train, test


def digit_zone_masks(dataset: Dataset, threshold: float) -> dict[int, np.ndarray]:
    """Per-class masks of pixels whose class-mean intensity exceeds threshold.

    Qualitative annotation only; never used in training.
    """
    if dataset.geometry is None:
        raise DataError("dataset has no grid geometry")
    rows, cols = dataset.geometry
    out = {}
    for c in np.unique(dataset.class_of):
        mean = dataset.inputs[dataset.class_of == c].mean(axis=0)
        out[int(c)] = (mean > threshold).reshape(rows, cols)
    return out
