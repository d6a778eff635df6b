"""Compare the compiled and numpy displacement kernels.

    python benchmarks/bench_kernels.py [--nodes 4000] [--truncation 60] [--repeat 3]

Times a batch of displacements (the quadrature hot loop) and one full
outcome-averaged fidelity on the default grid, for every available backend.
"""
import argparse
import time

import numpy as np

from cvteleport import _backend
from cvteleport.fock import coherent_state
from cvteleport.quadrature import QuadratureGrid
from cvteleport.teleport import TeleportParams, average_fidelity


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        func()
        times.append(time.perf_counter() - start)
    return min(times)


def run(nodes, truncation, repeat, grid_points):
    rng = np.random.default_rng(0)
    alphas = 2.0 * (rng.normal(size=nodes) + 1j * rng.normal(size=nodes))
    vecs = rng.normal(size=(nodes, truncation, 1)) + 1j * rng.normal(size=(nodes, truncation, 1))
    grid = QuadratureGrid(8.0, grid_points)
    p = TeleportParams(0.5, 1.0, truncation)
    psi = coherent_state(1.0, truncation)

    previous = _backend.active_backend()
    results = {}
    try:
        for name in _backend.available_backends():
            _backend.use_backend(name)
            batch = best_of(lambda: _backend.displace_batch(alphas, vecs), repeat)
            fid = best_of(lambda: average_fidelity(p, psi, grid), 1)
            results[name] = (batch, fid)
    finally:
        _backend.use_backend(previous)

    print(f"N={truncation}, {nodes} displacements, fidelity on {grid.size} nodes")
    print(f"{'backend':<8} {'batch [s]':>10} {'per-op [us]':>12} {'fidelity [s]':>13}")
    for name, (batch, fid) in results.items():
        print(f"{name:<8} {batch:>10.4f} {1e6 * batch / nodes:>12.2f} {fid:>13.3f}")
    if len(results) == 2:
        (b_c, f_c), (b_p, f_p) = results["cython"], results["python"]
        print(f"speedup: batch x{b_p / b_c:.1f}, fidelity x{f_p / f_c:.1f}")
    return results


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=4000)
    parser.add_argument("--truncation", type=int, default=60)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--grid-points", type=int, default=160)
    args = parser.parse_args(argv)
    run(args.nodes, args.truncation, args.repeat, args.grid_points)


if __name__ == "__main__":
    main()
