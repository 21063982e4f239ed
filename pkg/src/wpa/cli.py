"""Command-line harness.

Subcommands: train, radiograph, analyze, sweep, toy-gen, mnist-check.
Exit codes: 0 success, 2 configuration error, 3 data error.

Usage examples:
    wpa train --preset NNN20-toy2 --seed 7 --out runs/nnn20
    wpa radiograph --net runs/nnn20/net-seed7.wpanet --dataset toy2 \
        --node output:1 --out runs/nnn20
    wpa analyze --net runs/nnn20/net-seed7.wpanet --dataset toy2 --which modes
    wpa sweep --axis d --values 20,60,100,140,180 --preset NNN20-toy3 \
        --with-lni --out sweep.csv
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import _kernels
from .data import (DataError, load_mnist_dir, make_toy, read_idx,
                   find_mnist_file, _magic_of, IDX_IMAGES_MAGIC,
                   IDX_LABELS_MAGIC)
from .network import (NetFormatError, Network, accuracy, load_network,
                      margins, save_network)
from .pathways import (FieldFormatError, PenetrationField,
                       class_restricted_penetration, lni, mode_census,
                       penetration, save_field, zone_coefficients)
from .presets import ExperimentPreset, PRESETS, TOY_VARIANTS, get_preset
from .trainer import (ConfigError, TrainConfig, init_network, read_config,
                      train, trace_csv, trace_margins_csv)
from .viz import (Radiograph, RadiographProvenance, ensemble_average,
                  hidden_output_histogram, histogram_csv, render,
                  to_radiograph)
from . import pathways as _pathways


def _load_dataset(args, preset: ExperimentPreset | None = None):
    """(train, test|None) for a --dataset spec or a preset's dataset."""
    name = getattr(args, "dataset", None) or (preset.dataset if preset else None)
    if name is None:
        raise ConfigError("no dataset specified")
    if name.startswith("toy"):
        variant = TOY_VARIANTS.get(name)
        if variant is None:
            raise ConfigError(f"unknown dataset {name!r}")
        return make_toy(variant), None
    if name == "mnist":
        mnist_dir = getattr(args, "mnist_dir", None)
        if not mnist_dir:
            raise ConfigError("--mnist-dir is required for MNIST runs")
        n_classes = preset.n_classes if preset else getattr(args, "classes", 10)
        subset = preset.subset if preset else getattr(args, "subset", 600)
        return load_mnist_dir(mnist_dir, subset=subset, n_classes=n_classes)
    raise ConfigError(f"unknown dataset {name!r}")


def _outdir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ------------------------------------------------------------------ train

def _budget_overrides(cfg, args):
    """Apply --config then per-flag budget overrides to a TrainConfig."""
    if getattr(args, "config", None):
        cfg = read_config(args.config, defaults=cfg)
        cfg = replace(cfg, seed=args.seed)
    for field in ("max_steps", "record_every", "stop_cost", "replicas"):
        v = getattr(args, field, None)
        if v is not None:
            cfg = replace(cfg, **{field: v})
    return cfg


def cmd_train(args) -> int:
    preset = get_preset(args.preset)
    cfg = _budget_overrides(preset.train_config(seed=args.seed), args)
    ds, test = _load_dataset(args, preset)
    out = _outdir(args)
    backend = _kernels.available()[args.backend] if args.backend else None

    for i in range(cfg.replicas):
        seed = cfg.seed + i
        net = init_network(*preset.net_spec(), seed=seed)
        trace = train(net, ds, replace(cfg, seed=seed, replicas=1),
                      backend=backend, record_lni=args.record_lni)
        save_network(net, out / f"net-seed{seed}.wpanet")
        trace_csv(trace, out / f"trace-seed{seed}.csv")
        trace_margins_csv(trace, out / f"trace-margins-seed{seed}.csv")
        m = margins(net, ds.inputs, ds.targets)
        label_m = float(np.mean(m[np.arange(ds.n_samples), ds.class_of]))
        line = (f"seed {seed}: cost {trace.final_cost:.6g} "
                f"label-margin {label_m:.4g} "
                f"train-acc {accuracy(net, ds.inputs, ds.class_of):.4f}")
        if test is not None:
            line += f" test-acc {accuracy(net, test.inputs, test.class_of):.4f}"
        print(line)
    print(f"wrote {cfg.replicas} network(s) to {out} "
          f"[{(backend or _kernels.active()).NAME} kernel]")
    return 0


# ------------------------------------------------------------- radiograph

def _parse_node(spec: str):
    kind, _, rest = spec.partition(":")
    try:
        parts = [int(v) for v in rest.split(",")] if rest else []
        if kind == "output" and len(parts) == 1:
            return ("output", parts[0])
        if kind == "hidden" and len(parts) == 3:
            return ("hidden", *parts)
        if kind == "lni" and len(parts) == 2:
            return ("lni", *parts)
    except ValueError:
        pass
    raise ConfigError(
        f"bad node spec {spec!r}; use output:Q | hidden:L,I,Q | lni:MU,Q")


def _field_for(net: Network, ds, node) -> PenetrationField:
    if node[0] == "output":
        q = node[1]
        return penetration(net, net.n_layers, q, q)
    if node[0] == "hidden":
        layer, idx, q = node[1:]
        return penetration(net, layer, idx, q)
    mu, q = node[1:]
    table = lni(net, ds)
    subset = np.flatnonzero(table.assignment[q] == mu)
    return class_restricted_penetration(net, subset, q)


def cmd_radiograph(args) -> int:
    node = _parse_node(args.node)
    ds, _ = _load_dataset(args)
    if ds.geometry is None:
        raise DataError("dataset has no grid geometry")
    nets = [load_network(p) for p in args.net]
    rads = [to_radiograph(_field_for(net, ds, node), ds.geometry)
            for net in nets]
    rad = rads[0] if len(rads) == 1 else ensemble_average(rads)

    tag = {"output": "output{}".format,
           "hidden": lambda *p: "hidden{}-{}-out{}".format(*p),
           "lni": lambda *p: "lni-m{}-out{}".format(*p)}[node[0]](*node[1:])
    out = _outdir(args)
    render(rad, out / f"radiograph-{tag}.ppm")
    if node[0] == "output":
        layer, out_idx = nets[0].n_layers, node[1]
    elif node[0] == "hidden":
        layer, out_idx = node[1], node[3]
    else:
        layer, out_idx = 1, node[2]
    mean_field = PenetrationField(layer, -1, out_idx, rad.grid.reshape(-1))
    save_field(mean_field, ds.geometry, out / f"radiograph-{tag}.field")
    if ds.zones:
        zs = zone_coefficients(mean_field, ds.zones)
        print("zone sums: " + "  ".join(f"{k}={v:+.6g}"
                                        for k, v in sorted(zs.items())))
    print(f"wrote radiograph-{tag}.ppm ({len(nets)} replica(s)) to {out}")
    return 0


# ---------------------------------------------------------------- analyze

def cmd_analyze(args) -> int:
    net = load_network(args.net)
    ds, _ = _load_dataset(args)
    out = Path(args.out or f"{args.which}.csv")
    if out.parent != Path("."):
        out.parent.mkdir(parents=True, exist_ok=True)
    if args.which == "lni":
        table = lni(net, ds)
        _pathways.lni_csv(table, out)
        print("largest-contribution counts (rows=outputs, cols=samples):")
        print(table.counts)
    elif args.which == "modes":
        if "G" not in ds.zones or "F" not in ds.zones:
            raise DataError("mode census needs a dataset with G and F zones")
        census = mode_census(net, ds)
        _pathways.census_csv(census, out)
        for q in range(census.counts.shape[0]):
            top = census.as_dict(q)
            keep = {k: v for k, v in sorted(top.items(), key=lambda kv: -kv[1])
                    if v}
            print(f"output {q}: {keep}")
    else:
        hist = hidden_output_histogram(net, ds, bins=args.bins)
        histogram_csv(hist, out)
        edges, counts = hist.edges, hist.counts
        edge_mass = counts[np.abs((edges[:-1] + edges[1:]) / 2) > 0.96].sum()
        print(f"histogram: {counts.sum()} observations, "
              f"{edge_mass} in |x| > 0.96 bins")
    print(f"wrote {out}")
    return 0


# ------------------------------------------------------------------ sweep

def _apply_axis(preset: ExperimentPreset, axis: str, value: float):
    if axis == "d":
        return replace(preset, d=float(value))
    if axis == "k":
        return replace(preset, k=float(value))
    if axis == "width":
        sizes = list(preset.layer_sizes)
        if len(sizes) != 3:
            raise ConfigError("width sweep needs a single-hidden-layer preset")
        sizes[1] = int(value)
        return replace(preset, layer_sizes=tuple(sizes))
    if axis == "depth":
        hidden = preset.layer_sizes[1]
        sizes = (preset.layer_sizes[0],) + (hidden,) * int(value) \
            + (preset.layer_sizes[-1],)
        return replace(preset, layer_sizes=sizes)
    raise ConfigError(f"unknown sweep axis {axis!r}")


def cmd_sweep(args) -> int:
    base = get_preset(args.preset)
    try:
        values = [float(v) for v in args.values.split(",") if v]
    except ValueError:
        raise ConfigError(f"bad --values list {args.values!r}") from None
    if not values:
        raise ConfigError("--values is empty")
    ds, test = _load_dataset(args, base)
    rows = []
    lni_cols: list[str] = []
    for value in values:
        preset = _apply_axis(base, args.axis, value)
        cfg = _budget_overrides(preset.train_config(seed=args.seed), args)
        net = init_network(*preset.net_spec(), seed=args.seed)
        best_test = [float("nan")]
        if test is not None:
            def on_record(state, _net=net, _best=best_test):
                acc = accuracy(_net, test.inputs, test.class_of)
                if np.isnan(_best[0]) or acc > _best[0]:
                    _best[0] = acc
            trace = train(net, ds, cfg, on_record=on_record)
        else:
            trace = train(net, ds, cfg)
        row = {"value": value, "final_cost": trace.final_cost,
               "train_accuracy": accuracy(net, ds.inputs, ds.class_of),
               "best_test_accuracy": best_test[0]}
        if args.with_lni:
            counts = lni(net, ds).counts
            for mu in range(counts.shape[1]):
                for q in range(counts.shape[0]):
                    name = f"lni_m{mu}_o{q}"
                    row[name] = int(counts[q, mu])
                    if name not in lni_cols:
                        lni_cols.append(name)
        rows.append(row)
        print(f"{args.axis}={value:g}: cost {row['final_cost']:.6g} "
              f"train-acc {row['train_accuracy']:.4f}"
              + ("" if test is None
                 else f" best-test-acc {row['best_test_accuracy']:.4f}"))
    out = Path(args.out or "sweep.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    cols = ["value", "final_cost", "train_accuracy", "best_test_accuracy"] \
        + lni_cols
    with open(out, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=cols)
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {out}")
    return 0


# ---------------------------------------------------------------- toy-gen

def cmd_toy_gen(args) -> int:
    name = f"toy{args.variant}"
    ds, _ = _load_dataset(argparse.Namespace(dataset=name))
    out = _outdir(args)
    M = ds.geometry[0]
    for m in range(ds.n_samples):
        f = PenetrationField(-1, -1, m, ds.inputs[m])
        save_field(f, ds.geometry, out / f"sample-{m}.field")
        render(Radiograph(ds.inputs[m].reshape(M, M),
                          RadiographProvenance(-1, f"sample{m}", m)),
               out / f"sample-{m}.ppm")
    for zname, mask in sorted(ds.zones.items()):
        print(f"zone {zname}: {int(mask.sum())} pixels")
    print(f"wrote {ds.n_samples} sample grids to {out}")
    return 0


# ------------------------------------------------------------ mnist-check

def cmd_mnist_check(args) -> int:
    roles = ("train_images", "train_labels", "test_images", "test_labels")
    want_magic = {"images": IDX_IMAGES_MAGIC, "labels": IDX_LABELS_MAGIC}
    for role in roles:
        path = find_mnist_file(args.mnist_dir, role)
        magic = _magic_of(path)
        expect = want_magic[role.split("_")[1]]
        if magic != expect:
            raise DataError(f"{path}: magic {magic}, expected {expect}")
        arr = read_idx(path)
        print(f"{path.name}: magic {magic}, shape {arr.shape}")
    train, test = load_mnist_dir(args.mnist_dir)
    counts = np.bincount(train.class_of, minlength=10)
    print(f"train subset: {train.n_samples} samples, "
          f"per-class {[int(v) for v in counts]}")
    print(f"test: {test.n_samples} samples")
    return 0


# ------------------------------------------------------------------- main

def _add_dataset_flags(p: argparse.ArgumentParser, with_dataset=True):
    if with_dataset:
        p.add_argument("--dataset",
                       choices=["toy1", "toy2", "toy3", "mnist"])
    p.add_argument("--mnist-dir")
    p.add_argument("--classes", type=int, default=10, choices=[3, 5, 10])
    p.add_argument("--subset", type=int, default=600)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wpa",
        description="Train small networks by accept-if-better Monte Carlo "
                    "and analyze their weight pathways.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a preset and persist artifacts")
    p.add_argument("--preset", required=True,
                   help=f"one of: {', '.join(PRESETS)}")
    p.add_argument("--config", help="key=value file overriding budget fields")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--replicas", type=int)
    p.add_argument("--max-steps", type=int, dest="max_steps")
    p.add_argument("--record-every", type=int, dest="record_every")
    p.add_argument("--stop-cost", type=float, dest="stop_cost")
    p.add_argument("--record-lni", action="store_true")
    p.add_argument("--backend", choices=["python", "cython"])
    _add_dataset_flags(p, with_dataset=False)
    p.set_defaults(func=cmd_train, dataset=None)

    p = sub.add_parser("radiograph", help="render penetration fields")
    p.add_argument("--net", action="append", required=True,
                   help="network file; repeat for ensemble averaging")
    p.add_argument("--node", required=True,
                   help="output:Q | hidden:L,I,Q | lni:MU,Q")
    p.add_argument("--out")
    _add_dataset_flags(p)
    p.set_defaults(func=cmd_radiograph)

    p = sub.add_parser("analyze", help="export LNI/census/histogram CSVs")
    p.add_argument("--net", required=True)
    p.add_argument("--which", choices=["lni", "modes", "hist"], required=True)
    p.add_argument("--bins", type=int, default=101)
    p.add_argument("--out")
    _add_dataset_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="train across one axis, collect metrics")
    p.add_argument("--axis", choices=["d", "k", "width", "depth"],
                   required=True)
    p.add_argument("--values", required=True, help="comma-separated numbers")
    p.add_argument("--preset", required=True)
    p.add_argument("--config", help="key=value file overriding budget fields")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--max-steps", type=int, dest="max_steps")
    p.add_argument("--record-every", type=int, dest="record_every")
    p.add_argument("--stop-cost", type=float, dest="stop_cost")
    p.add_argument("--with-lni", action="store_true", dest="with_lni")
    _add_dataset_flags(p, with_dataset=False)
    p.set_defaults(func=cmd_sweep, dataset=None)

    p = sub.add_parser("toy-gen", help="export toy sample grids")
    p.add_argument("--variant", type=int, choices=[1, 2, 3], required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_toy_gen)

    p = sub.add_parser("mnist-check", help="validate IDX files in a directory")
    p.add_argument("--mnist-dir", required=True)
    p.set_defaults(func=cmd_mnist_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (DataError, NetFormatError, FieldFormatError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
