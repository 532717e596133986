"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--nodes 100000] [--edges 500000] [--repeat 5]

Times Dijkstra top-k on a synthetic graph and forest training on synthetic
labeled examples, once per backend.  Both backends must agree on the output.
"""

import argparse
import statistics
import time

from geosocial import _kernels
from geosocial.forest import ForestConfig, dumps_model, train
from geosocial.query import Query, tkngk
from geosocial.synthetic import CENTER, labeled_examples, random_graph


def best_of(fn, repeat):
    times = []
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return result, min(times), statistics.median(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=100_000)
    ap.add_argument("--edges", type=int, default=500_000)
    ap.add_argument("--examples", type=int, default=2_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = [("python", _kernels.python_backend)]
    if _kernels.compiled_backend is not None:
        backends.append(("cython", _kernels.compiled_backend))
    else:
        print("compiled backend unavailable; timing the Python fallback only")

    t0 = time.perf_counter()
    g = random_graph(0, n_users=args.nodes * 4 // 5, n_sps=args.nodes // 5, n_edges=args.edges)
    g.compiled()
    print(f"graph: {len(g)} nodes, built in {time.perf_counter() - t0:.1f} s")
    queries = [
        Query(g.users[i].id, kw, CENTER, 20_000.0, 10)
        for i, kw in enumerate([{"sushi", "coffee"}, {"pizza"}, {"bars", "tea", "vegan"}])
    ]
    examples = labeled_examples(0, args.examples)
    cfg = ForestConfig(n_trees=50, seed=0)

    outputs = {}
    print(f"{'kernel':<22}{'backend':<10}{'best':>10}{'median':>10}")
    for name, kernels in backends:
        res, best, med = best_of(lambda: [tkngk(g, q, kernels) for q in queries], args.repeat)
        print(f"{'dijkstra (3 queries)':<22}{name:<10}{best * 1e3:>8.1f}ms{med * 1e3:>8.1f}ms")
        model, best, med = best_of(lambda: train(examples, cfg, kernels), max(1, args.repeat // 2))
        print(f"{'forest (50 trees)':<22}{name:<10}{best * 1e3:>8.1f}ms{med * 1e3:>8.1f}ms")
        outputs[name] = (res, dumps_model(model))
    if len(outputs) == 2:
        same = outputs["python"] == outputs["cython"]
        print("backends agree" if same else "BACKENDS DISAGREE")


if __name__ == "__main__":
    main()
