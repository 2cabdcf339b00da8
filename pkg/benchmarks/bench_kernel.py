"""Compare the compiled and pure-Python successor kernels.

    python3 benchmarks/bench_kernel.py [--repeat 3]

Times a full exploration per configuration on each backend and reports
states per second and the speedup.
"""

import argparse
import time

from anonmutex.executor import RunConfig
from anonmutex.kernel import NATIVE_AVAILABLE, initial_key, make_kernel
from anonmutex.verifier import explore

CONFIGS = [
    ("rw n=2 m=3", RunConfig(n=2, m=3, algorithm="rw")),
    ("rmw n=2 m=3", RunConfig(n=2, m=3, algorithm="rmw")),
    ("rmw n=3 m=2", RunConfig(n=3, m=2, algorithm="rmw")),
    ("rw n=3 m=5 (200k cap)", RunConfig(n=3, m=5, algorithm="rw", permutations="seeded", seed=1)),
]


def best_of(repeat, fn):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def expand_rate(cfg, backend, rounds=2000):
    kernel = make_kernel(cfg, backend)
    key = initial_key(cfg)
    t0 = time.perf_counter()
    for _ in range(rounds):
        kernel.expand(key)
    return rounds / (time.perf_counter() - t0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--max-states", type=int, default=200_000)
    args = ap.parse_args()
    if not NATIVE_AVAILABLE:
        raise SystemExit("compiled kernel not built; run: pip install -e . --no-build-isolation")

    print(f"{'config':24} {'states':>8} {'python s':>9} {'native s':>9} {'speedup':>8}")
    for name, cfg in CONFIGS:
        tp, rp = best_of(args.repeat, lambda: explore(cfg, max_states=args.max_states, backend="python"))
        tn, rn = best_of(args.repeat, lambda: explore(cfg, max_states=args.max_states, backend="native"))
        assert rp.stats["states"] == rn.stats["states"]
        print(f"{name:24} {rn.stats['states']:>8} {tp:>9.3f} {tn:>9.3f} {tp / tn:>7.1f}x")

    cfg = CONFIGS[1][1]
    py, nat = expand_rate(cfg, "python"), expand_rate(cfg, "native")
    print(f"\nexpand() calls/s on rmw n=2 m=3: python {py:,.0f}, native {nat:,.0f} ({nat / py:.1f}x)")


if __name__ == "__main__":
    main()
