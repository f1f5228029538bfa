"""Time the hot kernels on both backends (numba vs pure numpy).

Run from the repository root:

    python benchmarks/bench_kernels.py

The script re-executes itself once per backend (the backend is chosen at
import time from NVBATH_DISABLE_NUMBA), times each kernel with a warmup
call so numba's compilation cost is excluded, and prints a comparison
table. Inputs are sized like the heaviest in-package uses: a 30 Angstrom
lattice sum, a criterion-scale bath envelope, and a broadened spectrum.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np

REPEATS = 5


def build_cases():
    from nvbath.lattice import generate_lattice, positions_of

    rng = np.random.Generator(np.random.Philox(key=0))
    pos = positions_of(generate_lattice(30.0))
    axis = np.full(3, 1.0 / np.sqrt(3.0))

    n_samples, n_sites = 2000, 700
    weights = np.where(rng.random((n_samples, n_sites)) < 0.5, 0.5, -0.5)
    weights *= rng.random((n_samples, n_sites)) < 0.05
    coups = 2e-3 * np.pi * rng.normal(0.0, 0.5, n_sites)
    t = np.linspace(0.0, 4000.0, 161)

    centers = rng.uniform(2400.0, 3300.0, 400)
    amps = rng.random(400)
    grid = np.linspace(2400.0, 3300.0, 20001)

    return {
        "second_moment_sum": ((pos, axis), f"{len(pos)} sites"),
        "phase_envelope": ((weights, coups, t),
                           f"{n_samples}x{n_sites} draws, {len(t)} times"),
        "gaussian_mixture": ((centers, amps, 1.0, grid),
                             f"{len(centers)} lines, {len(grid)} points"),
    }


def time_backend():
    from nvbath import _kernels

    out = {"backend": _kernels.BACKEND, "times": {}}
    for name, (args, note) in build_cases().items():
        fn = getattr(_kernels, name)
        fn(*args)  # warmup; compiles the numba path
        best = min(
            (lambda t0: (fn(*args), time.perf_counter() - t0)[1])(
                time.perf_counter())
            for _ in range(REPEATS))
        out["times"][name] = {"seconds": best, "note": note}
    return out


def main():
    if os.environ.get("NVBATH_BENCH_CHILD"):
        print(json.dumps(time_backend()))
        return

    results = {}
    for disable in ("0", "1"):
        env = dict(os.environ,
                   NVBATH_BENCH_CHILD="1",
                   NVBATH_DISABLE_NUMBA=disable)
        run = subprocess.run([sys.executable, os.path.abspath(__file__)],
                             env=env, capture_output=True, text=True,
                             check=True)
        data = json.loads(run.stdout.strip().splitlines()[-1])
        results[data["backend"]] = data["times"]

    numpy_times = results["numpy"]
    other = "numba" if "numba" in results else "numpy"
    if other == "numpy":
        print("numba not importable; both runs used the numpy path")
    header = f"{'kernel':22s} {'numpy':>10s} {other:>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, entry in numpy_times.items():
        t_np = entry["seconds"]
        t_ot = results[other][name]["seconds"]
        print(f"{name:22s} {t_np * 1e3:8.2f}ms {t_ot * 1e3:8.2f}ms "
              f"{t_np / t_ot:7.1f}x   ({entry['note']})")


if __name__ == "__main__":
    main()
