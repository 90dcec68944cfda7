"""A cool spec and its derived reader-writer language agree on traces."""

import argparse
import time

from rwsos.experiments import PreservationConfig, preservation_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--specs", type=int, default=200)
    ap.add_argument("--terms", type=int, default=50)
    ap.add_argument("--fuel", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = PreservationConfig(specs=args.specs, terms=args.terms, fuel=args.fuel, seed=args.seed)
    t = time.perf_counter()
    r = preservation_experiment(cfg)
    print(f"{r.checked} runs in {time.perf_counter() - t:.1f}s: {r.agree_finished} finished, "
          f"{r.agree_diverging} certified infinite, {r.cut} cut, {len(r.mismatches)} mismatches")


if __name__ == "__main__":
    main()
