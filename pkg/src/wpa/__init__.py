"""Weight pathway analysis toolkit.

Train small fully connected networks with an accept-if-better Monte Carlo
rule, decompose the trained weights into per-neuron subnetworks via
penetration coefficients, and inspect them through radiograph images,
characteristic maps, largest-contribution neuron counts, and hidden-neuron
mode censuses.
"""

from ._kernels import BACKEND
from .data import Dataset, MnistSource, ToySpec, load_mnist, make_toy
from .network import (Network, accuracy, classify, cost, forward, goal_flags,
                      load_network, margins, save_network)
from .pathways import (LniTable, ModeCensus, ModeLabel, PenetrationField,
                       characteristic_map, class_restricted_penetration,
                       classify_mode, cumulative_products, lni, load_field,
                       mode_census, penetration, save_field,
                       zone_coefficients)
from .presets import PRESETS, ExperimentPreset, get_preset
from .trainer import (McState, Mutation, TrainConfig, TrainTrace, delta_cost,
                      init_network, mc_step, propose, train, train_replicas)
from .viz import (Histogram, Radiograph, ensemble_average, export_csv,
                  hidden_output_histogram, render, to_radiograph)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Dataset", "MnistSource", "ToySpec", "load_mnist", "make_toy",
    "Network", "accuracy", "classify", "cost", "forward", "goal_flags",
    "load_network", "margins", "save_network", "LniTable", "ModeCensus",
    "ModeLabel", "PenetrationField", "characteristic_map",
    "class_restricted_penetration", "classify_mode", "cumulative_products",
    "lni", "load_field", "mode_census", "penetration", "save_field",
    "zone_coefficients", "PRESETS", "ExperimentPreset", "get_preset",
    "McState", "Mutation", "TrainConfig", "TrainTrace", "delta_cost",
    "init_network", "mc_step", "propose", "train", "train_replicas",
    "Histogram", "Radiograph", "ensemble_average", "export_csv",
    "hidden_output_histogram", "render", "to_radiograph", "__version__",
]
