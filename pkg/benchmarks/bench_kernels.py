"""Compare the compiled series kernels with their pure-Python twins.

Usage::

    python benchmarks/bench_kernels.py [--repeat N]

Prints per-call times for each kernel on both backends, the speed-up and
the largest relative disagreement, then times a full OMA evaluation
(which is dominated by Appell F1 sums) with each backend selected through
``FSNOMA_PURE_PYTHON``.
"""

import argparse
import os
import subprocess
import sys
import timeit

from fsnoma import _kernels_py as py

try:
    from fsnoma import _kernels as cy
except ImportError:  # extension not built
    cy = None

CASES = {
    "pfq_series 2F1 x=-0.45": ("pfq_series", ((21.0, 10.0), (11.0,), -0.45, 100000, 1e-12, 1e-300)),
    "pfq_series 3F2 x=-0.8": ("pfq_series", ((10.0, 10.0, 21.0), (11.0, 11.0), -0.8, 100000, 1e-12, 1e-300)),
    "f1_series x=(0.3, 0.5)": ("f1_series", (1.0, 21.0, 1.0, 7.0, 0.3, 0.5, 100000, 1e-12, 1e-300)),
    "f1_series x=(0.9, 0.5)": ("f1_series", (1.0, 21.0, 1.0, 12.0, 0.9, 0.5, 100000, 1e-12, 1e-300)),
}

END_TO_END = ("import time; from fsnoma import BACKEND, SystemConfig, c_oma_exact;"
              "cfg = SystemConfig.default(1e3); t = time.perf_counter();"
              "v = c_oma_exact(cfg).value; print(BACKEND, v, time.perf_counter() - t)")


def per_call(fn, args, repeat):
    timer = timeit.Timer(lambda: fn(*args))
    n, _ = timer.autorange()
    return min(timer.repeat(repeat, n)) / n


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled kernels not built; only the Python backend is available")
    print(f"{'kernel':28s} {'python us':>11s} {'cython us':>11s} {'speed-up':>9s} {'max rel diff':>13s}")
    for label, (name, a) in CASES.items():
        tp = per_call(getattr(py, name), a, args.repeat)
        vp = getattr(py, name)(*a)[0]
        if cy is not None:
            tc = per_call(getattr(cy, name), a, args.repeat)
            vc = getattr(cy, name)(*a)[0]
            diff = abs(vp - vc) / abs(vc)
            print(f"{label:28s} {tp * 1e6:11.1f} {tc * 1e6:11.1f} {tp / tc:9.1f} {diff:13.1e}")
        else:
            print(f"{label:28s} {tp * 1e6:11.1f} {'-':>11s} {'-':>9s} {'-':>13s}")
    print("\nend to end: OMA capacity at 30 dB (fresh process per backend)")
    for pure in ("0", "1"):
        env = dict(os.environ, FSNOMA_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"  backend {out[0]:7s} value {float(out[1]):.15f}  {float(out[2]) * 1e3:8.1f} ms")


if __name__ == "__main__":
    main()
