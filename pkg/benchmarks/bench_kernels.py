"""Compare the numba and pure-numpy kernel backends.

Each backend runs in its own interpreter (the backend is fixed at import time
by ``HC2LAB_NUMBA``). Every workload is called once to warm up, then timed
over ``--repeat`` runs; the best time is reported along with a checksum so the
two backends can be seen to agree.

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from hc2lab import _accel, kernels
from hc2lab.copies import enumerate_copies, power_edges, CyclicOrdering, _catalog
from hc2lab.graph_core import RngStream, sample_gnp, edge_index_table, num_words
from hc2lab.fragment_lab import build_fragment_family, classify_all

repeat = int(sys.argv[1])
cat10 = enumerate_copies(10)
S10 = power_edges(CyclicOrdering.identity(10)).words()
cat8 = enumerate_copies(8)
W8 = sample_gnp(8, 0.3, RngStream(3)).edges
fam = build_fragment_family(W8, 12)
graphs = [sample_gnp(12, 0.75, RngStream(5, t)) for t in range(20)]
ys = np.stack([sample_gnp(10, 0.8, RngStream(6, t)).edges.words() for t in range(200)])
few = np.ascontiguousarray(cat10.masks[:2000])


def enum10():
    import math
    r = kernels.enumerate_copies(10, 2, edge_index_table(10), num_words(10), math.factorial(9) // 2)
    return int(r[1].sum() % 1000003)


def supersets():
    return int(kernels.count_supersets(cat10.masks, S10 & np.uint64(0x00F0F0F0F)))


def overlaps():
    return int(kernels.overlap_counts(cat10.masks, S10).sum())


def subsets_many():
    return int(kernels.count_subsets_many(few, ys).sum())


def classify():
    best, _ = classify_all(W8, 12)
    return int(best.sum())


def pair_hist():
    return int((kernels.pair_intersection_hist(fam.members, 12) * np.arange(13)).sum())


def search():
    out = 0
    for g in graphs:
        v0 = int(np.argmin(g.degrees()))
        st = kernels.power_search(g.adjacency, g.adjacency, 2, v0, np.arange(12, dtype=np.int64),
                                  24, True, True, 10**9, 0.0)
        out = out * 3 + int(st[1] >= 0) + int(st[3]) % 7
    return out


res = {"backend": _accel.backend_name()}
for name, fn in [("enumerate_copies n=10", enum10), ("count_supersets n=10", supersets),
                 ("overlap_counts n=10", overlaps), ("count_subsets_many 2000x200", subsets_many),
                 ("classify_all n=8", classify), ("pair_intersection_hist |R|=%d" % len(fam), pair_hist),
                 ("power_search 20 graphs n=12", search)]:
    check = fn()
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    res[name] = {"seconds": best, "checksum": check}
print(json.dumps(res))
"""


def run_backend(flag: str, repeat: int) -> dict:
    env = dict(os.environ, HC2LAB_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True)
    if out.returncode != 0:
        raise SystemExit(out.stderr)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="also write the raw results here")
    args = ap.parse_args(argv)
    nb = run_backend("1", args.repeat)
    py = run_backend("0", args.repeat)
    names = [k for k in nb if k != "backend"]
    width = max(len(k) for k in names)
    print(f"{'workload':<{width}}  {'numba s':>10}  {'numpy s':>10}  {'speedup':>8}  agree")
    for k in names:
        a, b = nb[k]["seconds"], py[k]["seconds"]
        agree = nb[k]["checksum"] == py[k]["checksum"]
        print(f"{k:<{width}}  {a:>10.4f}  {b:>10.4f}  {b / a:>8.1f}  {agree}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"numba": nb, "numpy": py}, fh, indent=2)
    return 0 if all(nb[k]["checksum"] == py[k]["checksum"] for k in names) else 1


if __name__ == "__main__":
    sys.exit(main())
