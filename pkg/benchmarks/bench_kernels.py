"""Compare the compiled and pure-Python edge kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--size 128] [--repeat 5]

Times NMS, hysteresis, 8-connected labelling and the full BTE extraction
on random smooth images, and checks that both backends agree bit for bit.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from shiftcraft.bte import extract_bte
from shiftcraft.imgcore import _backend, gaussian_blur, hysteresis, label_components, nonmax_suppress, sobel_gradients


def backends():
    out = {"python": _backend.python_kernels}
    try:
        from shiftcraft.imgcore import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    img = gaussian_blur(rng.random((args.size, args.size)), 2.0)
    grad = sobel_gradients(img)
    thinned = nonmax_suppress(grad, _backend.python_kernels)
    hi = float(np.quantile(thinned[thinned > 0], 0.8))
    mask = hysteresis(thinned, 0.3 * hi, hi, _backend.python_kernels)

    cases = {
        "nms": lambda k: nonmax_suppress(grad, k),
        "hysteresis": lambda k: hysteresis(thinned, 0.3 * hi, hi, k),
        "label8": lambda k: label_components(mask, k)[0],
    }
    impls = backends()
    print(f"image {args.size}x{args.size}, best of {args.repeat}")
    print(f"{'kernel':12s}" + "".join(f"{name:>14s}" for name in impls) + ("      speedup" if len(impls) > 1 else ""))
    for case, fn in cases.items():
        results = {name: fn(k) for name, k in impls.items()}
        ref = results["python"]
        for name, r in results.items():
            if not np.array_equal(r, ref):
                raise SystemExit(f"{case}: backend {name} disagrees with python")
        times = {name: min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)) for name, k in impls.items()}
        row = f"{case:12s}" + "".join(f"{times[n] * 1e3:12.2f}ms" for n in impls)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:12.1f}x"
        print(row)
    t = min(timeit.repeat(lambda: extract_bte(img), number=1, repeat=args.repeat))
    print(f"extract_bte with the active backend ({_backend.BACKEND}): {t * 1e3:.2f}ms")


if __name__ == "__main__":
    main()
