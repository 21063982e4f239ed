"""Radiograph images, hidden-activation histograms, and CSV export.

Radiographs reshape a penetration field onto its pixel grid (index
M*alpha + beta) and render it with a linear red/blue diverging colormap,
normalized per image by the maximum absolute value. Output images are
binary P6 pixel maps: deterministic bytes, no image library needed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .network import Network, forward
from .pathways import (LniTable, ModeCensus, PenetrationField, census_csv,
                       lni_csv)
from .trainer import TrainTrace, trace_csv


@dataclass(frozen=True)
class RadiographProvenance:
    node_layer: int
    node: str          # neuron index as text, or a class/subset description
    output_index: int
    replicas: int = 1


@dataclass
class Radiograph:
    grid: np.ndarray                   # (M, M) float64
    provenance: RadiographProvenance

    @property
    def normalization(self) -> float:
        return float(np.max(np.abs(self.grid)))


def to_radiograph(field: PenetrationField,
                  geometry: tuple[int, int] | None = None) -> Radiograph:
    """Exact reshape of the coefficient vector onto the pixel grid."""
    n = field.coeffs.shape[0]
    if geometry is None:
        m = int(round(n ** 0.5))
        geometry = (m, m)
    rows, cols = geometry
    if rows != cols or rows * cols != n:
        raise ValueError(f"field of length {n} is not a square grid")
    node = str(field.node_index) if field.neuron_subset is None \
        else f"subset[{len(field.neuron_subset)}]"
    return Radiograph(field.coeffs.reshape(rows, cols).copy(),
                      RadiographProvenance(field.node_layer, node,
                                           field.output_index))


def ensemble_average(radiographs: list[Radiograph]) -> Radiograph:
    """Entrywise mean over replicas with matching provenance coordinates."""
    if not radiographs:
        raise ValueError("nothing to average")
    first = radiographs[0]
    coords = (first.provenance.node_layer, first.provenance.node,
              first.provenance.output_index)
    for r in radiographs[1:]:
        if r.grid.shape != first.grid.shape:
            raise ValueError("grid shapes disagree")
        if (r.provenance.node_layer, r.provenance.node,
                r.provenance.output_index) != coords:
            raise ValueError("provenance coordinates disagree")
    mean = np.mean([r.grid for r in radiographs], axis=0)
    return Radiograph(mean, RadiographProvenance(*coords,
                                                 replicas=len(radiographs)))


def render(radiograph: Radiograph, out_path) -> None:
    """Write a P6 image: red for positive, blue for negative, white at 0.

    Channels scale linearly with |value| / max |value|; a zero grid renders
    all white. Byte output is deterministic for identical grids.
    """
    g = radiograph.grid
    vmax = float(np.max(np.abs(g)))
    t = g / vmax if vmax > 0 else np.zeros_like(g)
    fade = np.rint(255.0 * (1.0 - np.abs(t))).astype(np.uint8)
    rows, cols = g.shape
    img = np.empty((rows, cols, 3), dtype=np.uint8)
    pos = t >= 0
    img[..., 0] = np.where(pos, 255, fade)
    img[..., 1] = fade
    img[..., 2] = np.where(pos, fade, 255)
    with open(out_path, "wb") as f:
        f.write(f"P6\n{cols} {rows}\n255\n".encode())
        f.write(img.tobytes())


# -------------------------------------------------------------- histogram

@dataclass
class Histogram:
    edges: np.ndarray     # (bins+1,) over [-1, 1]
    counts: np.ndarray    # (bins,) int64

    @property
    def density(self) -> np.ndarray:
        total = self.counts.sum()
        widths = np.diff(self.edges)
        if total == 0:
            return np.zeros_like(widths)
        return self.counts / (total * widths)


def hidden_output_histogram(net: Network, dataset, bins: int = 101) -> Histogram:
    """Distribution of first-hidden-layer outputs over all samples.

    Values are clipped into [-1, 1] before binning (linear hidden layers
    can exceed the nominal range) so counts always sum to the number of
    observations.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if net.n_layers < 2:
        raise ValueError("network has no hidden layer")
    x1 = forward(net, dataset.inputs).outputs[0].reshape(-1)
    edges = np.linspace(-1.0, 1.0, bins + 1)
    counts, _ = np.histogram(np.clip(x1, -1.0, 1.0), bins=edges)
    return Histogram(edges, counts.astype(np.int64))


def histogram_csv(hist: Histogram, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["bin_left", "bin_right", "count"])
        for b in range(len(hist.counts)):
            w.writerow([repr(float(hist.edges[b])),
                        repr(float(hist.edges[b + 1])),
                        int(hist.counts[b])])


def read_histogram_csv(path) -> Histogram:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))[1:]
    edges = [float(r[0]) for r in rows] + [float(rows[-1][1])]
    return Histogram(np.array(edges), np.array([int(r[2]) for r in rows]))


def export_csv(obj, path) -> None:
    """Write any exportable analysis object as CSV (schema per type)."""
    if isinstance(obj, TrainTrace):
        trace_csv(obj, path)
    elif isinstance(obj, Histogram):
        histogram_csv(obj, path)
    elif isinstance(obj, ModeCensus):
        census_csv(obj, path)
    elif isinstance(obj, LniTable):
        lni_csv(obj, path)
    else:
        raise TypeError(f"no CSV schema for {type(obj).__name__}")
