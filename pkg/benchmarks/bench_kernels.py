"""Compare the numba and numpy kernel paths, alone and inside a full solve.

    python benchmarks/bench_kernels.py [--sites 400] [--repeat 20]

The end-to-end rows toggle ``_accel.USE_NUMBA`` in-process, so they show how
much of a spectrum computation the kernels account for next to LAPACK.
"""

import argparse
import time

import numpy as np

from topobus import _accel
from topobus.flux_qubit import FluxQubitParameters, wkb_tunneling_amplitude
from topobus.wire_model import WireParameters, low_energy_spectrum


def best_of(fn, repeat):
    fn()  # warm-up (triggers numba compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sites", type=int, default=400)
    ap.add_argument("--grid", type=int, default=401)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if not _accel.HAS_NUMBA:
        print("numba not installed; only the numpy path is available")

    n = args.sites
    axis = np.linspace(-np.pi, np.pi, args.grid)
    pts = np.linspace(0, 2 * np.pi, args.grid**2)
    kernels = [
        ("bdg_band", lambda f: f(n, 1.0, 1.5, 1.0, 1.5, 0.5), _accel.bdg_band_numba, _accel.bdg_band_numpy),
        ("josephson_grid", lambda f: f(axis, axis, 1.25, 0.5), _accel.josephson_grid_numba, _accel.josephson_grid_numpy),
        ("josephson_points", lambda f: f(pts, pts[::-1].copy(), 1.25, 0.5), _accel.josephson_points_numba, _accel.josephson_points_numpy),
    ]
    print(f"{'kernel':<22}{'numba [ms]':>12}{'numpy [ms]':>12}{'ratio':>8}")
    for name, call, fast, slow in kernels:
        a = best_of(lambda: call(fast), args.repeat) * 1e3
        b = best_of(lambda: call(slow), args.repeat) * 1e3
        print(f"{name:<22}{a:>12.3f}{b:>12.3f}{b / a:>8.2f}")

    p = WireParameters(chemical_potential=-0.5, rashba=2.0, zeeman=1.5, length=float(n), num_sites=n)
    fq = FluxQubitParameters()
    e2e = [
        (f"spectrum N={n}", lambda: low_energy_spectrum(p)),
        ("wkb amplitude", lambda: wkb_tunneling_amplitude(fq, num=20001)),
    ]
    saved = _accel.USE_NUMBA
    for name, fn in e2e:
        _accel.USE_NUMBA = _accel.HAS_NUMBA
        a = best_of(fn, max(3, args.repeat // 4)) * 1e3
        _accel.USE_NUMBA = False
        b = best_of(fn, max(3, args.repeat // 4)) * 1e3
        print(f"{name:<22}{a:>12.3f}{b:>12.3f}{b / a:>8.2f}")
    _accel.USE_NUMBA = saved


if __name__ == "__main__":
    main()
