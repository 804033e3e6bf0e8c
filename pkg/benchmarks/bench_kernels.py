"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import math
import timeit

import numpy as np

from finsim.body import BodyParams
from finsim.kernels import backends


def cases(body: BodyParams):
    grid = body.grid()
    s = grid.points()
    args = (
        s, grid.weights(), body.diameter(s),
        np.asarray(body.section_masses), np.asarray(body.section_coms),
        body.spine_length, body.water_density, body.drag_coeff, body.fin_area, body.added_mass_coeff,
    )
    t = np.linspace(0.0, 16.0, 32001)
    theta_a = 0.5 * np.sin(2 * math.pi * t)
    theta_dot = math.pi * np.cos(2 * math.pi * t)
    u = np.linspace(-1.0, 1.0, 100001)
    force = 0.3 + 0.3 * np.cos(4 * math.pi * t)
    moment = 0.02 * np.sin(2 * math.pi * t)
    return {
        "shape_terms (1e5 points)": lambda m: m.shape_terms(u, 0.7, 0.25),
        "tail_integrals (32001 samples x 101 nodes)": lambda m: m.tail_integrals(theta_a, theta_dot, *args),
        "swim_rk4 (16000 steps)": lambda m: m.swim_rk4(np.zeros(5), force, moment, 1e-3, 2.05, 0.03, 4.0, 0.12),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    mods = backends()
    if "compiled" not in mods:
        print("compiled extension not built; timing the python backend only")
    print(f"{'kernel':46s}" + "".join(f"{name:>12s}" for name in mods) + "     speedup")
    for label, fn in cases(BodyParams()).items():
        times = {}
        for name, mod in mods.items():
            fn(mod)
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = f"{label:46s}" + "".join(f"{times[n] * 1e3:10.2f}ms" for n in mods)
        if "compiled" in times:
            row += f"  {times['python'] / times['compiled']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
