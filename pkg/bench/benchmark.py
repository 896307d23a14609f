"""Compare the numba kernels with the numpy fallback.

    python bench/benchmark.py            # kernel timings + end-to-end sweep
    python bench/benchmark.py --quick    # smaller inputs

Kernel timings call both implementations directly. The end-to-end timing runs
``hpqfim verify bounds`` in a subprocess per backend, because the backend is
fixed at import time by ``HPQFIM_DISABLE_NUMBA``.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from hpqfim import _accel, kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def inputs(n, rng):
    s = rng.normal(size=(n, 3))
    s *= (rng.uniform(0, 0.9, size=n) / np.linalg.norm(s, axis=1))[:, None]
    ds = rng.normal(size=(n, 3, 3))
    x = rng.normal(size=(n, 3, 3))
    j = np.einsum("nij,nkj->nik", x, x) + 0.1 * np.eye(3)
    a = np.array([0.25, 0.25, 0.25, 0.25])
    m = np.array([[0, 0, 0.25], [0, 0, -0.25], [0.25, 0, 0], [-0.25, 0, 0]])
    probs = rng.dirichlet(np.ones(4), size=n)
    return {
        "qfim_bloch_batch": (s, ds),
        "classical_fim_batch": (a, m, s, ds, 1e-12),
        "schur_batch": (j, 2, 1e-12),
        "sample_categorical": (probs, rng.random(n)),
    }


def kernel_table(sizes, repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'n':>9}{'numpy [ms]':>13}{'numba [ms]':>13}{'speedup':>9}")
    for n in sizes:
        for name, args in inputs(n, rng).items():
            kernels.NUMBA[name](*args)  # compile outside the timing
            t_np = best_of(lambda: kernels.NUMPY[name](*args), repeat)
            t_nb = best_of(lambda: kernels.NUMBA[name](*args), repeat)
            print(f"{name:<22}{n:>9}{1e3 * t_np:>13.3f}{1e3 * t_nb:>13.3f}{t_np / t_nb:>9.1f}")
    mats = [np.cov(rng.normal(size=(k, 4 * k))) for k in (2, 3, 8)]
    for a in mats:
        kernels.NUMBA["jacobi_eigh"](a)
        t_np = best_of(lambda: [kernels.NUMPY["jacobi_eigh"](a) for _ in range(1000)], repeat)
        t_nb = best_of(lambda: [kernels.NUMBA["jacobi_eigh"](a) for _ in range(1000)], repeat)
        label = f"jacobi_eigh {a.shape[0]}x{a.shape[0]}"
        print(f"{label:<22}{'1000':>9}{1e3 * t_np:>13.3f}{1e3 * t_nb:>13.3f}{t_np / t_nb:>9.1f}")


def end_to_end():
    cmd = [sys.executable, "-m", "hpqfim", "verify", "bounds"]
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, HPQFIM_DISABLE_NUMBA=flag)
        t0 = time.perf_counter()
        res = subprocess.run(cmd, env=env, capture_output=True, text=True)
        dt = time.perf_counter() - t0
        print(f"verify bounds [{label}]: {dt:.2f}s wall, exit {res.returncode}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        sys.exit("numba is not installed; install the 'accel' extra to benchmark")
    sizes = (128, 4096) if args.quick else (128, 4096, 65536)
    kernel_table(sizes, args.repeat)
    end_to_end()


if __name__ == "__main__":
    main()
