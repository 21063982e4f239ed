"""Weight pathway analysis: penetration coefficients, characteristic maps,
zone sums, largest-contribution neuron counts, and hidden-neuron mode labels.

All functions here are pure; networks and datasets are never mutated.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .network import Network, forward

DEGENERATE_EPS = 1e-12

FIELD_MAGIC = "WPA-FIELD v1"

# Canonical mode order used for census columns and CSV output.
MODE_NAMES = ("(-,-)4", "(-,-)3", "(-,-)2", "(-,-)1",
              "(-,+)", "(+,-)",
              "(+,+)1", "(+,+)2", "(+,+)3", "(+,+)4")


@dataclass
class PenetrationField:
    node_layer: int
    node_index: int
    output_index: int
    coeffs: np.ndarray                       # (N0,) float64
    neuron_subset: frozenset[int] | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("penetration coefficients must be finite")


def cumulative_products(net: Network) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Forward products A and backward products B around each layer.

    A[l-1] = W^(l) ... W^(1), shape (N_l, N0).
    B[l-1] = W^(L) ... W^(l+1), shape (NL, N_l); B[L-1] is the identity.
    """
    L = net.n_layers
    A: list[np.ndarray] = []
    cur = None
    for l in range(1, L + 1):
        cur = net.weights[l - 1] if cur is None else net.weights[l - 1] @ cur
        A.append(cur)
    B: list[np.ndarray] = [np.eye(net.layer_sizes[L])]
    back = B[0]
    for l in range(L - 1, 0, -1):
        back = back @ net.weights[l]
        B.insert(0, back)
    return A, B


def _check_node(net: Network, node_layer: int, node_index: int,
                output_index: int) -> None:
    L = net.n_layers
    if not 1 <= node_layer <= L:
        raise IndexError(f"node_layer {node_layer} outside 1..{L}")
    if not 0 <= node_index < net.layer_sizes[node_layer]:
        raise IndexError(f"node_index {node_index} outside layer {node_layer}")
    if not 0 <= output_index < net.layer_sizes[L]:
        raise IndexError(f"output_index {output_index} outside output layer")


def penetration(net: Network, node_layer: int, node_index: int,
                output_index: int) -> PenetrationField:
    """Input-pixel coefficients of the subnetwork through one node neuron.

    coeffs[i0] sums the weight products over every pathway from input i0
    through (node_layer, node_index) to the chosen output.
    """
    _check_node(net, node_layer, node_index, output_index)
    A, B = cumulative_products(net)
    c = A[node_layer - 1][node_index] * B[node_layer - 1][output_index, node_index]
    return PenetrationField(node_layer, node_index, output_index, c)


def class_restricted_penetration(net: Network, layer1_subset,
                                 output_index: int) -> PenetrationField:
    """Sum of layer-1 subnetwork fields over a subset of hidden neurons.

    An empty subset gives the zero field.
    """
    subset = frozenset(int(i) for i in layer1_subset)
    for i in subset:
        _check_node(net, 1, i, output_index)
    _check_node(net, 1, 0, output_index)
    A, B = cumulative_products(net)
    c = np.zeros(net.layer_sizes[0])
    for i in sorted(subset):
        c += A[0][i] * B[0][output_index, i]
    return PenetrationField(1, -1, output_index, c, neuron_subset=subset)


def characteristic_map(field: PenetrationField, sample_input: np.ndarray) -> float:
    """Total contribution H of the subnetwork for one input sample."""
    x = np.asarray(sample_input, dtype=np.float64).reshape(-1)
    if x.shape != field.coeffs.shape:
        raise ValueError("sample length does not match coefficient vector")
    return float(field.coeffs @ x)


def zone_coefficients(field: PenetrationField,
                      zones: dict[str, np.ndarray]) -> dict[str, float]:
    """Sum of coefficients over each named pixel zone.

    Sums (not means) so the zone algebra of characteristic maps is exact.
    """
    out = {}
    n = field.coeffs.shape[0]
    for name, mask in zones.items():
        idx = np.asarray(mask)
        flat = idx.reshape(-1) if idx.dtype == bool else idx
        if idx.dtype == bool:
            if flat.shape[0] != n:
                raise ValueError(f"zone {name!r} mask does not match grid")
            out[name] = float(np.sum(field.coeffs[flat]))
        else:
            if flat.size and (flat.min() < 0 or flat.max() >= n):
                raise IndexError(f"zone {name!r} index outside grid")
            out[name] = float(np.sum(field.coeffs[flat]))
    return out


# ------------------------------------------------------------------- LNI

@dataclass
class LniTable:
    counts: np.ndarray       # (NL, P) int64,  counts[i2, mu]
    assignment: np.ndarray   # (NL, N1) int64, assignment[i2, i1] = sample


def lni(net: Network, dataset) -> LniTable:
    """Largest-contribution sample of each layer-1 neuron, per output.

    The contribution of hidden neuron i1 to output i2 on sample mu is
    x1[mu, i1] * D[i2, i1] with D the product of all weight matrices above
    layer 1 (for a 3-layer net, exactly W2). For each output i2 the neuron
    is assigned to the sample where that contribution is largest; ties go
    to the lowest sample index. counts[i2] is the per-sample histogram of
    those assignments, so each row sums to the hidden-layer width.
    """
    L = net.n_layers
    if L < 2:
        raise ValueError("largest-contribution counts need a hidden layer")
    D = net.weights[L - 1]
    for l in range(L - 1, 1, -1):
        D = D @ net.weights[l - 1]
    x1 = forward(net, dataset.inputs).outputs[0]          # (P, N1)
    contrib = x1[:, :, None] * D.T[None, :, :]            # (P, N1, NL)
    assignment = np.argmax(contrib, axis=0).T.astype(np.int64)  # (NL, N1)
    P, n_out = dataset.inputs.shape[0], net.layer_sizes[L]
    counts = np.zeros((n_out, P), dtype=np.int64)
    for i2 in range(n_out):
        counts[i2] = np.bincount(assignment[i2], minlength=P)
    return LniTable(counts, assignment)


# ------------------------------------------------------------------ modes

@dataclass(frozen=True)
class ModeLabel:
    sign_pair: tuple[int, int]          # signs of (c(G), c(F)), each +1/-1
    branch: int | None
    name: str
    degenerate: bool = False


def _sign(v: float) -> int:
    if abs(v) < DEGENERATE_EPS:
        return 1
    return 1 if v > 0 else -1


def label_from_zone_sums(c_g: float, c_f: float,
                         face_values=(1.0, 2.0, 3.0)) -> ModeLabel:
    """Mode of a hidden neuron from its ground/face coefficient sums.

    H(mu) = -c(G) + e_mu*c(F) is monotone in the face value, so the branch
    subscript is fixed by how many H values are positive: ascending for
    (+,+) modes, descending for (-,-).
    """
    degenerate = abs(c_g) < DEGENERATE_EPS or abs(c_f) < DEGENERATE_EPS
    sg, sf = _sign(c_g), _sign(c_f)
    H = [-c_g + e * c_f for e in face_values]
    npos = sum(1 for h in H if h > 0)
    if sg < 0 and sf > 0:
        branch = None
        name = "(-,+)"
    elif sg > 0 and sf < 0:
        branch = None
        name = "(+,-)"
    elif sg > 0 and sf > 0:
        branch = 1 + npos
        name = f"(+,+){branch}"
    else:
        branch = 4 - npos
        name = f"(-,-){branch}"
    return ModeLabel((sg, sf), branch, name, degenerate)


def classify_mode(net: Network, hidden_index: int, dataset,
                  output_index: int) -> ModeLabel:
    """Table-style mode of one layer-1 neuron with respect to one output."""
    if "G" not in dataset.zones or "F" not in dataset.zones:
        raise ValueError("dataset needs G and F zones for mode labels")
    f = penetration(net, 1, hidden_index, output_index)
    zs = zone_coefficients(f, {"G": dataset.zones["G"], "F": dataset.zones["F"]})
    return label_from_zone_sums(zs["G"], zs["F"])


@dataclass
class ModeCensus:
    counts: np.ndarray       # (NL, 10) int64, columns in MODE_NAMES order
    degenerate: np.ndarray   # (NL, 10) int64, subset of counts

    def as_dict(self, output_index: int) -> dict[str, int]:
        return {name: int(self.counts[output_index, j])
                for j, name in enumerate(MODE_NAMES)}


def mode_census(net: Network, dataset) -> ModeCensus:
    """Mode counts of every layer-1 neuron, per output neuron.

    Equivalent to calling classify_mode for each (neuron, output) pair; the
    zone sums factorize through the layer-1 row sums, so the loop below
    reproduces those labels bitwise while staying cheap.
    """
    if "G" not in dataset.zones or "F" not in dataset.zones:
        raise ValueError("dataset needs G and F zones for mode labels")
    A, B = cumulative_products(net)
    g_mask = dataset.zones["G"].reshape(-1)
    f_mask = dataset.zones["F"].reshape(-1)
    n1 = net.layer_sizes[1]
    n_out = net.layer_sizes[net.n_layers]
    col = {name: j for j, name in enumerate(MODE_NAMES)}
    counts = np.zeros((n_out, 10), dtype=np.int64)
    degen = np.zeros((n_out, 10), dtype=np.int64)
    for i2 in range(n_out):
        for i1 in range(n1):
            c = A[0][i1] * B[0][i2, i1]
            lab = label_from_zone_sums(float(np.sum(c[g_mask])),
                                       float(np.sum(c[f_mask])))
            counts[i2, col[lab.name]] += 1
            if lab.degenerate:
                degen[i2, col[lab.name]] += 1
    return ModeCensus(counts, degen)


# ------------------------------------------------------------- field I/O

def save_field(field: PenetrationField, geometry: tuple[int, int], path) -> None:
    """Write the textual WPA-FIELD v1 grid file (square grids only)."""
    rows, cols = geometry
    if rows != cols:
        raise ValueError("grid file format is square")
    if rows * cols != field.coeffs.shape[0]:
        raise ValueError("geometry does not match coefficient vector")
    grid = field.coeffs.reshape(rows, cols)
    with open(path, "w") as f:
        f.write(FIELD_MAGIC + "\n")
        f.write(f"layer: {field.node_layer}\n")
        f.write(f"node: {field.node_index}\n")
        f.write(f"output: {field.output_index}\n")
        f.write(f"M: {rows}\n")
        for r in grid:
            f.write(" ".join(f"{v:.17g}" for v in r) + "\n")


class FieldFormatError(ValueError):
    pass


def load_field(path) -> PenetrationField:
    with open(path) as f:
        lines = [ln.rstrip("\n") for ln in f]
    if not lines or lines[0] != FIELD_MAGIC:
        raise FieldFormatError(f"not a {FIELD_MAGIC} file")
    try:
        hdr = dict(ln.split(": ", 1) for ln in lines[1:5])
        layer, node = int(hdr["layer"]), int(hdr["node"])
        out_idx, M = int(hdr["output"]), int(hdr["M"])
    except (ValueError, KeyError):
        raise FieldFormatError("bad grid file header") from None
    if len(lines) < 5 + M:
        raise FieldFormatError("truncated grid file")
    grid = np.empty((M, M))
    for r in range(M):
        vals = lines[5 + r].split()
        if len(vals) != M:
            raise FieldFormatError(f"row {r}: expected {M} values")
        grid[r] = [float(v) for v in vals]
    return PenetrationField(layer, node, out_idx, grid.reshape(-1))


# ------------------------------------------------------------- CSV export

def lni_csv(table: LniTable, path) -> None:
    """counts matrix as CSV: one row per output, one column per sample."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["output"] + [f"sample{m}"
                                 for m in range(table.counts.shape[1])])
        for i2, row in enumerate(table.counts):
            w.writerow([i2] + [int(v) for v in row])


def census_csv(census: ModeCensus, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["output"] + list(MODE_NAMES)
                   + [f"degenerate {n}" for n in MODE_NAMES])
        for i2 in range(census.counts.shape[0]):
            w.writerow([i2] + [int(v) for v in census.counts[i2]]
                       + [int(v) for v in census.degenerate[i2]])
