"""Wall-clock time of the full pipeline on 7-dimensional blob mixtures.

    python3 scripts/scale_benchmark.py --sizes 200 500 1139 --threads 4
"""

import argparse
import time

from stad.data_io import compute_distances
from stad.graph_core import set_threads
from stad.layout_export import export_graph
from stad.pipeline import build_network, to_network
from stad.samples import blob_mixture


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 500, 1139])
    ap.add_argument("--threads", type=int)
    args = ap.parse_args()
    set_threads(args.threads)

    print("n      distances  optimize  export  total   best_i   r")
    for n in args.sizes:
        t0 = time.perf_counter()
        d = compute_distances(blob_mixture(n, dim=7, seed=0))
        t1 = time.perf_counter()
        res = build_network(d)
        t2 = time.perf_counter()
        export_graph(to_network(res, d), "json")
        t3 = time.perf_counter()
        print(f"{n:<6d} {t1 - t0:9.2f}  {t2 - t1:8.2f}  {t3 - t2:6.2f}  {t3 - t0:6.2f}  "
              f"{res.optimization.best_i:7d}  {res.correlation:.4f}")


if __name__ == "__main__":
    main()
