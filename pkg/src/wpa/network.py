"""Fully connected networks without biases, and their margin-based cost.

Conventions used across the package: a network with layer sizes
(N0, N1, ..., NL) has L weight matrices; `weights[l-1]` is the (N_l, N_{l-1})
matrix feeding layer l, so layer numbers are 1-based with layer 0 = input.
All neuron/sample indices are 0-based. Hidden layers apply f(k*h) with f
either identity or tanh; the output layer is always linear (x = h).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("linear", "tanh")

NET_MAGIC = "WPA-NET v1"


@dataclass
class Network:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    activation: str
    k: float

    def __post_init__(self):
        self.layer_sizes = tuple(int(n) for n in self.layer_sizes)
        if len(self.layer_sizes) < 2:
            raise ValueError("need at least input and output layers")
        if any(n <= 0 for n in self.layer_sizes):
            raise ValueError("layer sizes must be positive")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not (self.k > 0):
            raise ValueError("k must be positive")
        if len(self.weights) != self.n_layers:
            raise ValueError("weight count does not match layer sizes")
        ws = []
        for l, w in enumerate(self.weights, start=1):
            w = np.ascontiguousarray(w, dtype=np.float64)
            want = (self.layer_sizes[l], self.layer_sizes[l - 1])
            if w.shape != want:
                raise ValueError(f"W{l} has shape {w.shape}, expected {want}")
            ws.append(w)
        self.weights = ws

    @property
    def n_layers(self) -> int:
        """Number of weight layers L."""
        return len(self.layer_sizes) - 1

    @property
    def num_weights(self) -> int:
        return sum(w.size for w in self.weights)

    def copy(self) -> "Network":
        return Network(self.layer_sizes, [w.copy() for w in self.weights],
                       self.activation, self.k)


@dataclass
class LayerActivations:
    """Per-layer local fields h and outputs x for a batch of samples.

    Both lists have one (P, N_l) array per weight layer l = 1..L at index
    l-1; outputs[-1] is the (linear) network output.
    """
    local_fields: list[np.ndarray] = field(default_factory=list)
    outputs: list[np.ndarray] = field(default_factory=list)


def _hidden(act: str, k: float, h: np.ndarray) -> np.ndarray:
    if act == "tanh":
        return np.tanh(k * h)
    return k * h


def forward(net: Network, inputs: np.ndarray) -> LayerActivations:
    """Run samples through the network.

    inputs: (P, N0) batch or a single (N0,) vector (treated as P=1 but
    returned without the sample axis squeeze; callers index [0]).
    """
    x = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    if x.shape[1] != net.layer_sizes[0]:
        raise ValueError("input width does not match layer 0")
    acts = LayerActivations()
    L = net.n_layers
    for l in range(1, L + 1):
        h = x @ net.weights[l - 1].T
        acts.local_fields.append(h)
        x = h if l == L else _hidden(net.activation, net.k, h)
        acts.outputs.append(x)
    return acts


def output_of(net: Network, inputs: np.ndarray) -> np.ndarray:
    """(P, NL) network output for a batch."""
    return forward(net, inputs).outputs[-1]


def margins(net: Network, inputs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """(P, NL) matrix of x_out * target, elementwise."""
    return output_of(net, inputs) * np.asarray(targets, dtype=np.float64)


def cost(net: Network, inputs: np.ndarray, targets: np.ndarray, d: float) -> float:
    """Mean squared deviation of the margins from d over samples and outputs."""
    m = margins(net, inputs, targets)
    return float(np.mean((m - d) ** 2))


def classify(net: Network, inputs: np.ndarray) -> np.ndarray:
    """Predicted class per sample: argmax output, ties to the lowest index."""
    return np.argmax(output_of(net, inputs), axis=1)


def accuracy(net: Network, inputs: np.ndarray, labels: np.ndarray) -> float:
    pred = classify(net, inputs)
    return float(np.mean(pred == np.asarray(labels)))


def goal_flags(net: Network, inputs: np.ndarray, targets: np.ndarray,
               d: float, tol: float | None = None) -> tuple[bool, bool]:
    """(training goal, classification goal) for a dataset.

    Training goal: every margin within tol of d (default tol = 0.05*d).
    Classification goal: every margin strictly positive.
    """
    if tol is None:
        tol = 0.05 * d
    m = margins(net, inputs, targets)
    return bool(np.all(np.abs(m - d) <= tol)), bool(np.all(m > 0.0))


# ---------------------------------------------------------------- file I/O

def save_network(net: Network, path) -> None:
    """Write the textual WPA-NET v1 format (round-trip exact)."""
    with open(path, "w") as f:
        f.write(NET_MAGIC + "\n")
        f.write("layers: " + " ".join(str(n) for n in net.layer_sizes) + "\n")
        f.write(f"activation: {net.activation}\n")
        f.write(f"k: {net.k:.17g}\n")
        for l, w in enumerate(net.weights, start=1):
            f.write(f"W{l} {w.shape[0]} {w.shape[1]}\n")
            for row in w:
                f.write(" ".join(f"{v:.17g}" for v in row) + "\n")


class NetFormatError(ValueError):
    pass


def _expect(line: str | None, what: str) -> str:
    if line is None:
        raise NetFormatError(f"truncated file, expected {what}")
    return line.rstrip("\n")


def load_network(path) -> Network:
    with open(path) as f:
        lines = iter(f.readlines())
    nxt = lambda what: _expect(next(lines, None), what)

    if nxt("magic") != NET_MAGIC:
        raise NetFormatError(f"not a {NET_MAGIC} file")
    hdr = nxt("layers")
    if not hdr.startswith("layers: "):
        raise NetFormatError("missing layers header")
    sizes = tuple(int(t) for t in hdr[len("layers: "):].split())
    act = nxt("activation")
    if not act.startswith("activation: "):
        raise NetFormatError("missing activation header")
    act = act[len("activation: "):]
    kline = nxt("k")
    if not kline.startswith("k: "):
        raise NetFormatError("missing k header")
    k = float(kline[len("k: "):])

    weights = []
    for l in range(1, len(sizes)):
        hdr = nxt(f"W{l} header").split()
        if len(hdr) != 3 or hdr[0] != f"W{l}":
            raise NetFormatError(f"bad W{l} block header")
        rows, cols = int(hdr[1]), int(hdr[2])
        w = np.empty((rows, cols), dtype=np.float64)
        for r in range(rows):
            vals = nxt(f"W{l} row {r}").split()
            if len(vals) != cols:
                raise NetFormatError(f"W{l} row {r}: expected {cols} values")
            w[r] = [float(v) for v in vals]
        weights.append(w)
    try:
        return Network(sizes, weights, act, k)
    except ValueError as e:
        raise NetFormatError(str(e)) from None
