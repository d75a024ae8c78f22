"""Time the compiled core against the numpy fallback.

Usage::

    python benchmarks/bench_backends.py [--repeat 5] [--n 200] [--batch 200000]

Reports the best wall time per backend and the speedup for the two hot
kernels: Stein Gram assembly and the Euler-Maruyama accept loop. Outputs of
the two backends are checked for agreement before timing.
"""

import argparse
import time

import numpy as np

from hilbert_ksd import _backend


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def gram_inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(5):
        A = rng.standard_normal((n, n)) / np.sqrt(n)
        out.append(A @ A.T)
    return out


def em_inputs(steps, batch, seed=0):
    rng = np.random.default_rng(seed)
    dt = 50.0 / steps
    return rng.standard_normal((steps, batch)) * np.sqrt(dt), dt


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=200, help="samples in the Gram benchmark")
    ap.add_argument("--steps", type=int, default=1024, help="EM steps")
    ap.add_argument("--batch", type=int, default=20000, help="EM paths per call")
    args = ap.parse_args(argv)

    impls = _backend.implementations()
    if "compiled" not in impls:
        print("compiled core not built; only the python fallback is available")

    bb, q, r, p, z = gram_inputs(args.n)
    inc, dt = em_inputs(args.steps, args.batch)
    cases = {
        f"stein_gram_pairs SE  n={args.n}":
            lambda m: m.stein_gram_pairs(_backend.SE_CODE, bb, q, r, p, z, 0.5),
        f"stein_gram_pairs IMQ n={args.n}":
            lambda m: m.stein_gram_pairs(_backend.IMQ_CODE, bb, q, r, p, z, 0.5),
        f"em_sine_accept {args.steps}x{args.batch}":
            lambda m: m.em_sine_accept(inc, 0.0, dt, -1.0, 0.1),
    }

    print(f"{'kernel':<34}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for label, call in cases.items():
        results = {name: call(mod) for name, mod in impls.items()}
        ref = results["python"]
        for name, val in results.items():
            if val.shape != ref.shape or not np.allclose(val, ref, rtol=1e-9, atol=1e-9):
                raise SystemExit(f"{label}: {name} disagrees with the python fallback")
        times = {name: _best(lambda m=mod: call(m), args.repeat) for name, mod in impls.items()}
        row = f"{label:<34}" + "".join(f"{times[name] * 1e3:>10.2f}ms" for name in impls)
        if "compiled" in times:
            row += f"{times['python'] / times['compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
