"""Imp versus Imp² on every small program and a grid of stores."""

import argparse
import time

from rwsos.experiments import EmbeddingConfig, embedding_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--fuel", type=int, default=100)
    args = ap.parse_args()
    cfg = EmbeddingConfig(depth=args.depth, fuel=args.fuel)
    t = time.perf_counter()
    r = embedding_experiment(cfg)
    print(f"{r.checked} runs in {time.perf_counter() - t:.1f}s: {r.agree_finished} finished, "
          f"{r.agree_diverging} certified infinite, {r.cut_cut + r.one_cut} cut, "
          f"{len(r.mismatches)} mismatches")
    for m in r.mismatches[:10]:
        print("  mismatch:", m)


if __name__ == "__main__":
    main()
