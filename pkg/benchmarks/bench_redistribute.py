"""Compare the compiled and pure-Python redistribution kernels.

Usage: python3 benchmarks/bench_redistribute.py [--instances 2000] [--seed 1]
"""

import argparse
import random
import time

from rankrecovery import _kernels_py

try:
    from rankrecovery import _kernels
except ImportError:
    _kernels = None


def make_instances(count, seed, max_nodes, max_load):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(1, max_nodes)
        out.append((list(range(1, n + 1)), [rng.randint(0, max_load) for _ in range(n)]))
    return out


def bench(impl, instances, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for ids, loads in instances:
            impl.redistribute_loads(ids, loads, 1, 64)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--instances", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--max-nodes", type=int, default=128)
    parser.add_argument("--max-load", type=int, default=10**6)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    instances = make_instances(args.instances, args.seed, args.max_nodes, args.max_load)
    py = bench(_kernels_py, instances, args.repeat)
    print(f"python  {py * 1e3:9.1f} ms  ({py / len(instances) * 1e6:.1f} us/instance)")
    if _kernels is None:
        print("cython  not built")
        return
    for ids, loads in instances:
        assert _kernels.redistribute_loads(ids, loads, 1, 64) == _kernels_py.redistribute_loads(ids, loads, 1, 64)
    cy = bench(_kernels, instances, args.repeat)
    print(f"cython  {cy * 1e3:9.1f} ms  ({cy / len(instances) * 1e6:.1f} us/instance)")
    print(f"speedup {py / cy:.1f}x")


if __name__ == "__main__":
    main()
