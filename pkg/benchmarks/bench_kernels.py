"""Time the numba kernels against their pure-numpy fallbacks.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from homlim import _kernels
from homlim.geometry import ParameterSchedule


def _time(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_cantor(npts=200_000, stage=6):
    a = ParameterSchedule(n=3, beta=4.0, kind="A")
    b = ParameterSchedule(n=3, beta=4.0, kind="B")
    rs, rso = a.radii(stage)
    rt, rto = b.radii(stage)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, (npts, 3))
    out = np.empty_like(pts)
    rows = []
    if _kernels.cantor_map_points_jit is not None:
        _kernels.cantor_map_points_jit(pts[:8], rs, rso, rt, rto, stage, out[:8])
        rows.append(("numba", _time(_kernels.cantor_map_points_jit,
                                    pts, rs, rso, rt, rto, stage, out)))
    rows.append(("numpy", _time(_kernels.cantor_map_points_numpy,
                                pts, rs, rso, rt, rto, stage, out)))
    return f"nested-cube map, {npts} pts, stage {stage}", rows


def bench_solid_angle(ntris=100_000, nys=20):
    rng = np.random.default_rng(1)
    tris = rng.normal(size=(ntris, 3, 3))
    ys = rng.normal(size=(nys, 3))
    rows = []
    if _kernels.solid_angle_sum_jit is not None:
        _kernels.solid_angle_sum_jit(tris[:8], ys[0])

        def run_jit():
            for y in ys:
                _kernels.solid_angle_sum_jit(tris, y)

        rows.append(("numba", _time(run_jit)))

    def run_np():
        for y in ys:
            _kernels.solid_angle_sum_numpy(tris, y)

    rows.append(("numpy", _time(run_np)))
    return f"solid-angle sums, {ntris} tris x {nys} targets", rows


def bench_winding(npts=200_000, nys=50):
    rng = np.random.default_rng(2)
    loop = rng.normal(size=(npts, 2))
    ys = rng.normal(size=(nys, 2))
    rows = []
    if _kernels.winding_sum_jit is not None:
        _kernels.winding_sum_jit(loop[:8], ys[0])

        def run_jit():
            for y in ys:
                _kernels.winding_sum_jit(loop, y)

        rows.append(("numba", _time(run_jit)))

    def run_np():
        for y in ys:
            _kernels.winding_sum_numpy(loop, y)

    rows.append(("numpy", _time(run_np)))
    return f"winding sums, {npts}-gon x {nys} targets", rows


def main():
    print(f"numba active: {_kernels.using_numba()}")
    for bench in (bench_cantor, bench_solid_angle, bench_winding):
        title, rows = bench()
        print(f"\n{title}")
        base = rows[-1][1]
        for name, t in rows:
            print(f"  {name:>6}: {t*1e3:9.2f} ms   ({base/t:5.2f}x vs numpy)")


if __name__ == "__main__":
    main()
