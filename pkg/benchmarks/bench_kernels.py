"""Times the compiled kernels against the pure NumPy fallbacks.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from cpareto import _pykern

try:
    from cpareto import _ckern
except ImportError:
    _ckern = None

from cpareto import kernels
from cpareto.coalitions import CoalitionStructure
from cpareto.fixtures import load_fixture
from cpareto.lpsolve import LinearProgram, WeightGrid, assemble_linear, coalition_objective_rows, solve_lp


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_masks():
    rng = np.random.default_rng(0)
    F = rng.random((2000, 3))
    rows = [("nondominated_mask 2000x3", lambda impl: (lambda: impl.nondominated_mask(F)))]
    G = rng.random((800, 3))
    rows.append(("nondominated_ranks 800x3", lambda impl: (lambda: impl.nondominated_ranks(G))))
    return rows


def bench_sweep(impl):
    sc = load_fixture("testcase1")
    system = assemble_linear(sc)
    rows = coalition_objective_rows(sc, CoalitionStructure.singletons(3))
    costs = WeightGrid(3, 16).vectors() @ rows

    def run():
        saved = kernels.simplex_loop
        kernels.simplex_loop = impl.simplex_loop
        try:
            for c in costs:
                solve_lp(LinearProgram(c=c, B=system.B, b=system.b, lo=system.lo, hi=system.hi))
        finally:
            kernels.simplex_loop = saved

    return run


def main():
    impls = [("fallback", _pykern)] + ([("compiled", _ckern)] if _ckern else [])
    print(f"active backend: {kernels.BACKEND}\n")
    header = f"{'kernel':<32}" + "".join(f"{name:>12}" for name, _ in impls)
    if len(impls) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for label, make in bench_masks():
        times = [timeit(make(impl)) for _, impl in impls]
        line = f"{label:<32}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:>9.1f}x"
        print(line)
    times = [timeit(bench_sweep(impl), repeats=2) for _, impl in impls]
    line = f"{'simplex sweep (153 LPs, 30 var)':<32}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
    if len(times) == 2:
        line += f"{times[0] / times[1]:>9.1f}x"
    print(line)


if __name__ == "__main__":
    main()
