"""Compare the compiled and pure-numpy kernels, alone and inside full NPMLE fits.

Usage: python benchmarks/bench_core.py [--repeat N]
"""
import argparse
import time

import numpy as np

from psdmix import _core
from psdmix._core import _fallback
from psdmix.kernels import KernelSpec
from psdmix.npmle import FitConfig, fit_npmle
from psdmix.simlab import scenario

try:
    from psdmix._core import _ext
except ImportError:
    _ext = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_cases():
    rng = np.random.default_rng(0)
    ks = np.arange(0.0, 60.0)
    log_b = KernelSpec("poisson").log_coeff(ks)
    coef = rng.random(ks.size)
    lo = np.linspace(0.1, 40, 30)
    hi = lo + 1.5
    thetas = rng.uniform(10, 30, 20000)
    u = rng.random(thetas.size)
    f0 = np.exp(-thetas)
    return {
        "golden_max_lin (30 brackets)": lambda m: m.golden_max_lin(0, 1.0, lo, hi, ks, log_b, coef, -1.0, 40),
        "lin_grad (200 thetas)": lambda m: m.lin_grad(0, 1.0, np.linspace(0, 40, 200), ks, log_b, coef, -1.0),
        "invert_psd (20000 draws)": lambda m: m.invert_psd(0, 1.0, thetas, u, f0),
    }


def fit_case(n_fits=20):
    sc = scenario("poisson-unif-10-30")
    data = [sc.mixture.sample(500, s) for s in range(n_fits)]

    def run():
        for d in data:
            fit_npmle(d, sc.kernel, FitConfig())

    return run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ext is None:
        print("compiled extension not built; only the fallback is available")
        return
    print(f"{'case':32s} {'cython ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, fn in kernel_cases().items():
        tc = best_of(lambda: fn(_ext), args.repeat)
        tp = best_of(lambda: fn(_fallback), args.repeat)
        print(f"{name:32s} {1e3 * tc:10.3f} {1e3 * tp:10.3f} {tp / tc:8.1f}")
    run = fit_case()
    saved = (_core.lin_grad, _core.golden_max_lin)
    tc = best_of(run, max(1, args.repeat // 2))
    _core.lin_grad, _core.golden_max_lin = _fallback.lin_grad, _fallback.golden_max_lin
    try:
        tp = best_of(run, max(1, args.repeat // 2))
    finally:
        _core.lin_grad, _core.golden_max_lin = saved
    print(f"{'20 NPMLE fits, U(10,30), n=500':32s} {1e3 * tc:10.3f} {1e3 * tp:10.3f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
