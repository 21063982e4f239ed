"""Named experiment presets: architecture, control parameters, MC budgets.

Step budgets are desk-scale constants chosen so the toy presets converge in
seconds-to-minutes with the compiled kernel and the MNIST presets within a
few hours on one core. Early stop triggers at stop_cost (checked at record
boundaries); budgets are upper bounds, not targets.
"""

from __future__ import annotations

from dataclasses import dataclass

from .trainer import ConfigError, TrainConfig

TOY_ARCH = (10_000, 200, 3)

TOY_VARIANTS = {"toy1": "disjoint", "toy2": "full_overlap",
                "toy3": "partial_overlap"}


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    dataset: str                    # "toy1" | "toy2" | "toy3" | "mnist"
    layer_sizes: tuple[int, ...]
    activation: str
    k: float
    d: float
    max_steps: int
    record_every: int
    stop_cost: float = 0.0
    replicas: int = 1
    n_classes: int = 10             # mnist: digits kept (3, 5 or 10)
    subset: int = 600               # mnist: training samples kept
    notes: str = ""

    def net_spec(self) -> tuple[tuple[int, ...], str, float]:
        return (self.layer_sizes, self.activation, self.k)

    def train_config(self, seed: int = 0, replicas: int | None = None,
                     **overrides) -> TrainConfig:
        kw = dict(d=self.d, max_steps=self.max_steps, seed=seed,
                  record_every=self.record_every, stop_cost=self.stop_cost,
                  replicas=replicas if replicas is not None else self.replicas)
        kw.update(overrides)
        return TrainConfig(**kw)


def _toy(name, variant, activation, d, max_steps, record_every, stop_cost,
         notes=""):
    return ExperimentPreset(name, f"toy{variant}", TOY_ARCH, activation,
                            0.002, d, max_steps, record_every, stop_cost,
                            notes=notes)


def _mnist(name, layer_sizes, activation, k, d, notes="", n_classes=10,
           max_steps=150_000_000, record_every=2_000_000):
    return ExperimentPreset(name, "mnist", layer_sizes, activation, k, d,
                            max_steps, record_every, stop_cost=0.01,
                            n_classes=n_classes, notes=notes)


_ALL = [
    # circle toys, 10^4-200-3
    *[_toy(f"LNN20-toy{v}", v, "linear", 20.0, 60_000_000, 200_000, 0.01)
      for v in (1, 2, 3)],
    *[_toy(f"NNN20-toy{v}", v, "tanh", 20.0, 60_000_000, 200_000, 0.01)
      for v in (1, 2, 3)],
    *[_toy(f"NNN200-toy{v}", v, "tanh", 200.0, 150_000_000, 1_000_000, 0.01,
           notes="margins saturate well below d; budget-bound")
      for v in (1, 2, 3)],
    # MNIST, 600 training samples
    _mnist("MNIST-d30-p3", (784, 600, 3), "tanh", 0.15, 30.0, n_classes=3),
    _mnist("MNIST-d30-p5", (784, 600, 5), "tanh", 0.15, 30.0, n_classes=5),
    _mnist("MNIST-d30-p10", (784, 600, 10), "tanh", 0.15, 30.0),
    _mnist("MNIST-d75-p10", (784, 600, 10), "tanh", 0.15, 75.0),
    _mnist("MNIST-LNN-opt", (784, 600, 10), "linear", 0.013, 180.0,
           notes="optimal linear control parameters"),
    _mnist("MNIST-NNN-opt", (784, 600, 10), "tanh", 0.15, 70.0,
           notes="optimal tanh control parameters"),
    # width / depth studies
    _mnist("MNIST-w1200", (784, 1200, 10), "tanh", 0.15, 70.0),
    _mnist("MNIST-w1800", (784, 1800, 10), "tanh", 0.15, 70.0),
    _mnist("MNIST-deep4", (784, 600, 600, 10), "tanh", 0.15, 70.0,
           max_steps=10_000_000, record_every=200_000,
           notes="per-step cost grows with depth; expect long runs"),
    _mnist("MNIST-deep5", (784, 600, 600, 600, 10), "tanh", 0.15, 70.0,
           max_steps=10_000_000, record_every=200_000,
           notes="per-step cost grows with depth; expect long runs"),
]

PRESETS = {p.name: p for p in _ALL}
_BY_LOWER = {p.name.lower(): p for p in _ALL}


def get_preset(name: str) -> ExperimentPreset:
    try:
        return _BY_LOWER[name.lower()]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(PRESETS)}"
        ) from None
