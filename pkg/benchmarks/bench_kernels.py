"""Compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--resolution 17]

Times the 1-D conjugate on a batch of lines, one energy/gradient assembly
on a laminate mesh and a full envelope build, and checks that both
backends give the same numbers.
"""

import argparse
import timeit

import numpy as np

from twowell import kernels
from twowell.energy import two_well
from twowell.envelope import build_biconjugate
from twowell.laminate import build_laminate_field
from twowell.wellsgeo import TwoWellParams, laminate_decompose


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_conjugate(backend, repeat):
    rng = np.random.default_rng(0)
    x = np.linspace(-3, 3, 33)
    s = np.linspace(-6, 6, 65)
    f = np.ascontiguousarray(rng.standard_normal((20_000, x.size)) + x**2)
    out = np.empty((f.shape[0], s.size))
    k = kernels.get(backend)
    return best(lambda: k.conjugate_lines(f, x, s, out), repeat), out.copy()


def bench_assembly(backend, repeat, fld):
    k = kernels.get(backend)
    u = np.ascontiguousarray(fld.deformed)
    grad = np.zeros_like(u)
    args = (1, 0.5, 1000.0, u, fld.triangles_i64, fld.ref_inverse, fld.areas, grad)
    t = best(lambda: k.assemble_builtin(*args), repeat)
    grad[:] = 0.0
    e = k.assemble_builtin(*args)
    return t, (np.array(e[:2]), grad.copy())


def bench_envelope(backend, repeat, resolution):
    model = two_well()
    t = best(lambda: build_biconjugate(model, resolution=resolution, backend=backend), repeat)
    return t, build_biconjugate(model, resolution=resolution, backend=backend).values


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--resolution", type=int, default=17)
    args = ap.parse_args(argv)
    if "cython" not in kernels.BACKENDS:
        print("compiled extension not built; only the fallback is available")
        return 1
    params = TwoWellParams()
    fld = build_laminate_field(laminate_decompose(params.midpoint, params), 32, 1 / 32)
    cases = [
        ("conjugate_lines (20000 x 33 -> 65)", lambda b: bench_conjugate(b, args.repeat)),
        (f"assembly ({fld.n_triangles} triangles)", lambda b: bench_assembly(b, args.repeat, fld)),
        (
            f"envelope build (resolution {args.resolution})",
            lambda b: bench_envelope(b, max(1, args.repeat // 3), args.resolution),
        ),
    ]
    print(f"{'kernel':40s} {'cython [s]':>11s} {'python [s]':>11s} {'speedup':>8s}  max diff")
    for name, run in cases:
        tc, rc = run("cython")
        tp, rp = run("python")
        if isinstance(rc, tuple):
            diff = max(float(np.abs(a - b).max()) for a, b in zip(rc, rp))
        else:
            diff = float(np.abs(rc - rp).max())
        print(f"{name:40s} {tc:11.4f} {tp:11.4f} {tp / tc:8.1f}  {diff:.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
