"""Accept-if-better Monte Carlo training of margin costs.

One proposal = pick one weight uniformly over the whole network, redraw it
uniformly on [-1, 1], accept only if the cost strictly decreases. The cost
is the mean squared deviation of all output margins from the control
parameter d. Incremental evaluation recomputes only activations downstream
of the touched weight; the running cost therefore never increases, exactly.

Draws come from counter streams (see rng): step t consumes draws 2t (weight
index) and 2t+1 (new value) of the train stream, so recording strides and
chunk sizes cannot perturb a trajectory, and replicas i use seed+i.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .network import Network, forward
from .rng import STREAM_INIT, STREAM_TRAIN, CounterRng, stream_key, uniform_block


class ConfigError(ValueError):
    """Raised for invalid or unparseable training configuration."""


@dataclass(frozen=True)
class TrainConfig:
    d: float
    max_steps: int
    seed: int = 0
    record_every: int = 100_000
    stop_cost: float = 0.0
    replicas: int = 1

    def __post_init__(self):
        if not (self.d > 0):
            raise ConfigError("d must be positive")
        if self.max_steps < 0:
            raise ConfigError("max_steps must be >= 0")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")


@dataclass(frozen=True)
class Mutation:
    layer: int        # 1-based weight layer l
    row: int
    col: int
    old_value: float
    new_value: float


# ----------------------------------------------------------------- state

class McState:
    """Activation cache plus proposal bookkeeping for one network.

    Holds transposed (neuron-major) copies of inputs/targets and per-layer
    local fields/outputs so a single proposal touches contiguous rows.
    The kernel backends mutate this in place; the wrapped Network's weight
    arrays are shared, not copied, so the caller's net trains in place.
    """

    def __init__(self, net: Network, dataset, d: float, seed: int = 0):
        self.net = net
        self.dataset = dataset
        self.d = float(d)
        self.k = net.k
        self.act_code = 1 if net.activation == "tanh" else 0
        self.key = stream_key(seed, STREAM_TRAIN)

        if dataset.inputs.shape[1] != net.layer_sizes[0]:
            raise ValueError("dataset width does not match the network")
        if dataset.targets.shape[1] != net.layer_sizes[-1]:
            raise ValueError("dataset targets do not match the output layer")

        self.x0T = np.ascontiguousarray(dataset.inputs.T)
        self.yT = np.ascontiguousarray(dataset.targets.T)
        acts = forward(net, dataset.inputs)
        self.hT = [np.ascontiguousarray(h.T) for h in acts.local_fields]
        self.xT = [np.ascontiguousarray(x.T) for x in acts.outputs[:-1]]
        self.cand_h = [np.empty_like(a) for a in self.hT]
        self.cand_x = [np.empty_like(a) for a in self.xT]
        self.dx = [np.empty_like(a) for a in self.xT]
        P = dataset.inputs.shape[0]
        self.dxrow = np.empty(P)
        self.denom = float(P * net.layer_sizes[-1])

        sizes = [w.size for w in net.weights]
        self.offsets_list = [0]
        for s in sizes:
            self.offsets_list.append(self.offsets_list[-1] + s)
        self.offsets = np.asarray(self.offsets_list, dtype=np.int64)
        self.num_weights = self.offsets_list[-1]

        m = self.margins()
        self.S = float(np.mean((m - self.d) ** 2))
        self.t = 0
        self.accepted = 0

    def margins(self) -> np.ndarray:
        """(NL, P) cached margin matrix."""
        return self.hT[-1] * self.yT

    def audit(self) -> float:
        """Max residual between the cache and a fresh forward pass."""
        acts = forward(self.net, self.dataset.inputs)
        worst = 0.0
        for cached, new in zip(self.hT, acts.local_fields):
            worst = max(worst, float(np.max(np.abs(cached - new.T))))
        for cached, new in zip(self.xT, acts.outputs[:-1]):
            worst = max(worst, float(np.max(np.abs(cached - new.T))))
        m = acts.outputs[-1] * self.dataset.targets
        worst = max(worst, abs(self.S - float(np.mean((m - self.d) ** 2))))
        return worst


def init_network(layer_sizes, activation: str, k: float, seed: int = 0) -> Network:
    """Weights independent uniform on [-1, 1], reproducible per seed."""
    key = stream_key(seed, STREAM_INIT)
    sizes = tuple(int(n) for n in layer_sizes)
    weights = []
    start = 0
    for l in range(1, len(sizes)):
        count = sizes[l] * sizes[l - 1]
        u = uniform_block(key, start, count)
        weights.append((2.0 * u - 1.0).reshape(sizes[l], sizes[l - 1]))
        start += count
    return Network(sizes, weights, activation, k)


def propose(rng: CounterRng, net: Network) -> Mutation:
    """Draw one uniform weight position and one replacement value."""
    g = rng.next_index(net.num_weights)
    for wl, w in enumerate(net.weights):
        if g < w.size:
            i, j = divmod(g, w.shape[1])
            return Mutation(wl + 1, i, j, float(w[i, j]), rng.next_symmetric())
        g -= w.size
    raise AssertionError("unreachable")


def delta_cost(state: McState, m: Mutation) -> float:
    """Cost change the mutation would cause; state is not modified.

    Reference implementation: always evaluated by the pure-Python kernel
    regardless of the active backend.
    """
    from ._kernels import mc_python
    wl = m.layer - 1
    dw = m.new_value - state.net.weights[wl][m.row, m.col]
    return mc_python.delta_and_stage(state, wl, m.row, m.col, dw)


def mc_step(state: McState, backend=None) -> bool:
    """Run one proposal (draws 2t, 2t+1 of the train stream); True if accepted."""
    kern = backend or _kernels.active()
    before = state.accepted
    kern.run_chunk(state, 1)
    return state.accepted != before


# ----------------------------------------------------------------- trace

@dataclass
class TrainTrace:
    steps: np.ndarray
    cost: np.ndarray
    mean_margin_all: np.ndarray
    mean_margin_label: np.ndarray
    margin_by_output: np.ndarray          # (R, NL) means over all samples
    label_margin_by_output: np.ndarray    # (R, NL) means over own-class samples
    accepted: np.ndarray
    lni_counts: list[np.ndarray] | None = None

    def __len__(self):
        return len(self.steps)

    @property
    def final_cost(self) -> float:
        return float(self.cost[-1]) if len(self.steps) else float("nan")


def trace_csv(trace: TrainTrace, path) -> None:
    """Columns: step, cost, mean_margin_all, mean_margin_label, accepted_total."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["step", "cost", "mean_margin_all", "mean_margin_label",
                    "accepted_total"])
        for r in range(len(trace.steps)):
            w.writerow([int(trace.steps[r]), repr(float(trace.cost[r])),
                        repr(float(trace.mean_margin_all[r])),
                        repr(float(trace.mean_margin_label[r])),
                        int(trace.accepted[r])])


def trace_margins_csv(trace: TrainTrace, path) -> None:
    """Per-output margin means over time (all samples and own-class only)."""
    n_out = trace.margin_by_output.shape[1]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["step"] + [f"margin_all_out{q}" for q in range(n_out)]
                   + [f"margin_label_out{q}" for q in range(n_out)])
        for r in range(len(trace.steps)):
            w.writerow([int(trace.steps[r])]
                       + [repr(float(v)) for v in trace.margin_by_output[r]]
                       + [repr(float(v)) for v in trace.label_margin_by_output[r]])


class _TraceBuilder:
    def __init__(self, dataset, record_lni: bool):
        self.class_of = dataset.class_of
        self.label_masks = [dataset.class_of == q
                            for q in range(dataset.targets.shape[1])]
        self.rows = []
        self.lni = [] if record_lni else None

    def record(self, state: McState, net: Network, dataset):
        m = state.margins()                      # (NL, P)
        by_out = m.mean(axis=1)
        label_by_out = np.array([m[q, mask].mean() if mask.any() else np.nan
                                 for q, mask in enumerate(self.label_masks)])
        label_all = float(np.mean(m[self.class_of, np.arange(m.shape[1])]))
        self.rows.append((state.t, state.S, float(m.mean()), label_all,
                          by_out, label_by_out, state.accepted))
        if self.lni is not None:
            from .pathways import lni
            self.lni.append(lni(net, dataset).counts)

    def build(self) -> TrainTrace:
        if not self.rows:
            z = np.zeros(0)
            return TrainTrace(z.astype(int), z, z, z,
                              z.reshape(0, 1), z.reshape(0, 1),
                              z.astype(int), self.lni)
        cols = list(zip(*self.rows))
        return TrainTrace(np.array(cols[0]), np.array(cols[1]),
                          np.array(cols[2]), np.array(cols[3]),
                          np.stack(cols[4]), np.stack(cols[5]),
                          np.array(cols[6]), self.lni)


def train(net: Network, dataset, cfg: TrainConfig, *, backend=None,
          record_lni: bool = False, on_record=None) -> TrainTrace:
    """Train `net` in place; returns the recorded trace.

    Records at step 0 and then every record_every steps (plus the final
    step); stops early once the cost reaches stop_cost, checked at record
    boundaries. max_steps=0 is a no-op returning an empty trace.
    """
    kern = backend or _kernels.active()
    state = McState(net, dataset, cfg.d, seed=cfg.seed)
    tb = _TraceBuilder(dataset, record_lni)
    if cfg.max_steps == 0:
        return tb.build()

    def rec():
        tb.record(state, net, dataset)
        if on_record is not None:
            on_record(state)

    rec()
    while state.t < cfg.max_steps and state.S > cfg.stop_cost:
        kern.run_chunk(state, min(cfg.record_every, cfg.max_steps - state.t))
        rec()
    return tb.build()


def train_replicas(dataset, cfg: TrainConfig, base_net_spec,
                   *, backend=None) -> list[Network]:
    """Independently train cfg.replicas fresh networks with seeds seed+i.

    base_net_spec: (layer_sizes, activation, k). Replica i is initialized
    and trained with seed cfg.seed + i; results do not depend on order.
    """
    layer_sizes, activation, k = base_net_spec
    nets = []
    for i in range(cfg.replicas):
        seed = cfg.seed + i
        net = init_network(layer_sizes, activation, k, seed)
        train(net, dataset, replace(cfg, seed=seed, replicas=1),
              backend=backend)
        nets.append(net)
    return nets


# ---------------------------------------------------------- config files

_CONFIG_FIELDS = {
    "d": float,
    "max_steps": int,
    "seed": int,
    "record_every": int,
    "stop_cost": float,
    "replicas": int,
}


def parse_config(text: str, defaults: TrainConfig | None = None) -> TrainConfig:
    """key = value lines, # comments; keys are TrainConfig field names."""
    values = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected key = value")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"line {ln}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_FIELDS[key](val)
        except ValueError:
            raise ConfigError(f"line {ln}: bad value for {key!r}") from None
    if defaults is not None:
        return replace(defaults, **values)
    missing = {"d", "max_steps"} - values.keys()
    if missing:
        raise ConfigError(f"missing required keys: {sorted(missing)}")
    return TrainConfig(**values)


def read_config(path, defaults: TrainConfig | None = None) -> TrainConfig:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    return parse_config(text, defaults)
