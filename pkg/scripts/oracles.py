"""Simulation checkers against map equality, brute force and the weakening property."""

import argparse
import time

from rwsos.experiments import brute_force_oracle, kernel_oracle, weakening_oracle


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--systems", type=int, default=300)
    ap.add_argument("--triples", type=int, default=500)
    args = ap.parse_args()
    t = time.perf_counter()
    print("kernel vs observation maps:", len(kernel_oracle(args.systems)), "disagreements")
    print("greatest vs brute force:   ", len(brute_force_oracle(args.systems)), "disagreements")
    falses, holding = weakening_oracle(args.triples)
    print(f"weakening: {len(falses)} falses ({holding}/{args.triples} relations were simulations)")
    print(f"{time.perf_counter() - t:.1f}s")


if __name__ == "__main__":
    main()
