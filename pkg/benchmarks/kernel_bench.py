"""Benchmark the MC training kernels (compiled extension vs pure numpy).

Runs the same deterministic accept-if-better chain through each available
backend and reports steps/second plus the speedup of the compiled kernel.
Both runs must land on bitwise-identical cost, step count, and accepted
count; the benchmark aborts if they diverge.

Usage:
    python3 benchmarks/kernel_bench.py --steps 2000000
    python3 benchmarks/kernel_bench.py --preset NNN20-toy1 --steps 500000
"""

import argparse
import time

from wpa import _kernels
from wpa.data import make_toy
from wpa.presets import TOY_VARIANTS, get_preset
from wpa.trainer import McState, init_network


def time_backend(kern, preset, steps: int, chunk: int):
    ds = make_toy(TOY_VARIANTS[preset.dataset])
    net = init_network(*preset.net_spec(), seed=0)
    state = McState(net, ds, preset.d, seed=0)
    t0 = time.monotonic()
    done = 0
    while done < steps:
        n = min(chunk, steps - done)
        kern.run_chunk(state, n)
        done += n
    wall = time.monotonic() - t0
    return wall, state


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="LNN20-toy1")
    ap.add_argument("--steps", type=int, default=2_000_000)
    ap.add_argument("--chunk", type=int, default=200_000)
    args = ap.parse_args(argv)

    preset = get_preset(args.preset)
    backends = _kernels.available()
    print(f"preset {args.preset}, {args.steps} steps, "
          f"active backend: {_kernels.BACKEND}")

    results = {}
    for name, kern in sorted(backends.items()):
        wall, state = time_backend(kern, preset, args.steps, args.chunk)
        results[name] = (wall, state)
        rate = args.steps / wall
        print(f"  {name:7s} {wall:8.2f} s   {rate:12,.0f} steps/s   "
              f"{1e9 / rate:7.1f} ns/step   "
              f"S={state.S:.6f} accepted={state.accepted}")

    if len(results) == 2:
        (sp, pp), (sc, cc) = results["python"], results["cython"]
        if (pp.S != cc.S or pp.t != cc.t or pp.accepted != cc.accepted):
            raise SystemExit("backends diverged: "
                             f"python S={pp.S!r} t={pp.t} a={pp.accepted}, "
                             f"cython S={cc.S!r} t={cc.t} a={cc.accepted}")
        print(f"  parity OK (identical S, t, accepted); "
              f"speedup x{sp / sc:.1f}")


if __name__ == "__main__":
    main()
