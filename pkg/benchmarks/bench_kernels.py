"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--n-users 20] [--tau 10] [--m 100] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from locpilot import _pykernels, kernels
from locpilot.assignment import distance_order
from locpilot.harness import ExperimentConfig, draw_drop, substream
from locpilot.interference import user_arrays


def workload(n_users: int, tau: int, m: int, seed: int = 0):
    config = ExperimentConfig(n_users=n_users, tau=tau)
    drop = draw_drop(config, substream(seed, 0, 0))
    cell, cfg = config.cell(m), config.training()
    arr = user_arrays(drop, cell)
    args = (arr.beta, arr.los_w, arr.nlos_w, arr.sin_t, m, cell.antenna_spacing_ratio, 1.0 / cfg.p_p)
    return distance_order(drop), args


def bench(backend, order, tau, args, number: int, repeat: int) -> dict:
    pilots, _ = backend.location_aware(order, tau, *args)
    u = np.linspace(-3.0, 3.0, 1001).tolist()
    cases = {
        "location_aware": lambda: backend.location_aware(order, tau, *args),
        "total_interference": lambda: backend.total_interference(pilots, tau, *args),
        "dirichlet x1001": lambda: [backend.dirichlet_cycles(x, args[4]) for x in u],
    }
    return {name: min(timeit.repeat(fn, number=number, repeat=repeat)) / number
            for name, fn in cases.items()}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-users", type=int, default=20)
    p.add_argument("--tau", type=int, default=10)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--number", type=int, default=200)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)

    order, kargs = workload(args.n_users, args.tau, args.m)
    py = bench(_pykernels, order, args.tau, kargs, args.number, args.repeat)
    if kernels.compiled_backend is None:
        print("compiled backend not built; python timings only")
        for name, t in py.items():
            print(f"{name:<20}{t * 1e6:>12.1f} us")
        return
    cy = bench(kernels.compiled_backend, order, args.tau, kargs, args.number, args.repeat)
    # both backends must agree exactly on the workload
    a = kernels.compiled_backend.location_aware(order, args.tau, *kargs)
    b = _pykernels.location_aware(order, args.tau, *kargs)
    assert np.array_equal(a[0], b[0]) and a[1] == b[1]
    print(f"N={args.n_users} tau={args.tau} M={args.m}")
    print(f"{'kernel':<20}{'python [us]':>14}{'cython [us]':>14}{'speedup':>10}")
    for name in py:
        print(f"{name:<20}{py[name] * 1e6:>14.1f}{cy[name] * 1e6:>14.1f}{py[name] / cy[name]:>9.1f}x")


if __name__ == "__main__":
    main()
