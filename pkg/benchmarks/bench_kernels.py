"""Compiled vs numpy kernels, per kernel and per solver step.

    python3 benchmarks/bench_kernels.py [--n 32 64] [--repeat 5]

Kernel timings call both backends in-process on identical inputs. Step
timings run a short simulation in a subprocess per backend, since the
backend is fixed at import.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from energylab import Grid
from energylab.kernels import get_backend, threads

STEP_SCRIPT = """
import time
from energylab import BACKEND, ForcingSpec, Grid, InitialSpec, SolverConfig, simulate
cfg = SolverConfig(Grid({n}), 0.05, 1e-3, {steps} * 1e-3, ForcingSpec("none"), InitialSpec("random", seed=1, rms=0.5),
                   snapshot_stride={steps})
simulate(SolverConfig(Grid({n}), 0.05, 1e-3, 1e-3, ForcingSpec("none"), InitialSpec("random", seed=1, rms=0.5)))
t = time.perf_counter()
simulate(cfg)
print(BACKEND, (time.perf_counter() - t) / {steps})
"""


def kernel_cases(grid, rng):
    c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    x = rng.standard_normal(grid.physical_shape)
    y = rng.standard_normal(grid.physical_shape)
    grad = rng.standard_normal((3,) + grid.physical_shape)
    out_c = np.empty_like(c)
    out_x = np.empty_like(x)
    k = (grid.kx, grid.ky, grid.kz)
    nt = threads()
    return {
        "leray_inplace": lambda b: b.leray_inplace(c.copy(), *k, nt),
        "curl": lambda b: b.curl(c, *k, out_c, nt),
        "cross": lambda b: b.cross(x, y, out_x, nt),
        "convect": lambda b: b.convect(x, grad, out_x, nt),
        "sobolev_sum": lambda b: b.sobolev_sum(c, *k, grid.wz, 5 / 6, nt),
        "inner": lambda b: b.inner(c, out_c, grid.wz, nt),
        "shell_sum": lambda b: b.shell_sum(c, *k, grid.wz, grid.num_shells, nt),
    }


def best_of(fn, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def step_time(n, steps, pure):
    env = dict(os.environ)
    env.pop("ENERGYLAB_PURE_PYTHON", None)
    if pure:
        env["ENERGYLAB_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", STEP_SCRIPT.format(n=n, steps=steps)],
                         env=env, capture_output=True, text=True, check=True)
    name, seconds = out.stdout.split()
    return name, float(seconds)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, nargs="+", default=[32, 64])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--steps", type=int, default=10)
    args = parser.parse_args(argv)

    try:
        compiled = get_backend("compiled")
    except ImportError:
        sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation` first")
    python = get_backend("python")
    rng = np.random.default_rng(0)

    print(f"threads = {threads()}")
    print(f"{'n':>4} {'kernel':<14} {'compiled ms':>12} {'numpy ms':>10} {'speedup':>8}")
    for n in args.n:
        for name, fn in kernel_cases(Grid(n), rng).items():
            tc = best_of(lambda: fn(compiled), args.repeat)
            tp = best_of(lambda: fn(python), args.repeat)
            print(f"{n:>4} {name:<14} {1e3 * tc:>12.3f} {1e3 * tp:>10.3f} {tp / tc:>7.1f}x")
    print()
    print(f"{'n':>4} {'solver step':<14} {'compiled ms':>12} {'numpy ms':>10} {'speedup':>8}")
    for n in args.n:
        _, tc = step_time(n, args.steps, pure=False)
        _, tp = step_time(n, args.steps, pure=True)
        print(f"{n:>4} {'rk4 step':<14} {1e3 * tc:>12.1f} {1e3 * tp:>10.1f} {tp / tc:>7.2f}x")


if __name__ == "__main__":
    main()
