"""Compare the compiled gradient kernels against the NumPy fallback.

Times both backends on the shapes the samplers actually hit and prints a
table of per-call medians plus the speedup. Also cross-checks that the two
backends agree to near machine precision on every timed shape, so a broken
extension build cannot look fast and wrong.

Usage: python3 benchmarks/bench_backends.py [--repeats 50] [--warmup 5]
"""

import argparse
import time

import numpy as np

from paritylab._core import available_backends, get_backend

SHAPES = [
    # (label, P, width, d, with_bias)
    ("desk reference  P=3200 N=128 d=10", 3200, 128, 10, False),
    ("desk particles  P=3200 B=128 d=10", 3200, 128, 10, False),
    ("wide reference  P=512  N=512 d=64", 512, 512, 64, True),
    ("wide particles  P=512  B=512 d=64", 512, 512, 64, True),
]


def _median_call_us(fn, repeats, warmup):
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return 1e6 * float(np.median(samples))


def _max_dev(outs_a, outs_b):
    dev = 0.0
    for x, y in zip(outs_a, outs_b):
        if x is None and y is None:
            continue
        dev = max(dev, float(np.max(np.abs(np.asarray(x) - np.asarray(y)))))
    return dev


def bench_shape(label, P, width, d, with_bias, repeats, warmup):
    rng = np.random.default_rng(0)
    X = rng.standard_normal((P, d))
    y = rng.standard_normal(P)
    r = rng.standard_normal(P)
    W = rng.standard_normal((width, d)) / np.sqrt(d)
    a = rng.standard_normal(width)
    b = rng.standard_normal(width) if with_bias else None
    particles = "particles" in label

    calls, outs = {}, {}
    for name in available_backends():
        backend = get_backend(name)
        if particles:
            eng = backend.ParticleKernel(X, 0.5, with_bias)
            calls[name] = lambda eng=eng: eng.stats(W, a, b, r)
        else:
            eng = backend.ReferenceKernel(X, y, 0.5, with_bias)
            calls[name] = lambda eng=eng: eng.grads(W, a, b)
        outs[name] = calls[name]()

    dev = 0.0
    if len(outs) == 2:
        dev = _max_dev(outs["compiled"], outs["numpy"])

    times = {name: _median_call_us(fn, repeats, warmup) for name, fn in calls.items()}
    return times, dev


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=50)
    parser.add_argument("--warmup", type=int, default=5)
    args = parser.parse_args()

    names = available_backends()
    print(f"backends: {', '.join(names)}")
    header = f"{'shape':38s} " + "".join(f"{n:>12s}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10s}{'max dev':>12s}"
    print(header)
    print("-" * len(header))
    for label, P, width, d, with_bias in SHAPES:
        times, dev = bench_shape(label, P, width, d, with_bias,
                                 args.repeats, args.warmup)
        row = f"{label:38s} " + "".join(f"{times[n]:>10.0f}us" for n in names)
        if len(names) == 2:
            row += f"{times['numpy'] / times['compiled']:>9.2f}x{dev:>12.2e}"
        print(row)


if __name__ == "__main__":
    main()
