"""Random congruence trials for Imp², random cool specs and their derived languages."""

import argparse
import time

from rwsos.experiments import CongruenceConfig, congruence_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--imp2-trials", type=int, default=1000)
    ap.add_argument("--specs", type=int, default=10)
    ap.add_argument("--spec-trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = CongruenceConfig(args.imp2_trials, args.specs, args.spec_trials, args.seed)
    t = time.perf_counter()
    for fl, (counted, skipped, violations) in congruence_experiment(cfg).items():
        print(f"{fl.value:>5}: {counted} trials, {skipped} skipped, {len(violations)} violations")
        for v in violations[:5]:
            print("   ", v)
    print(f"{time.perf_counter() - t:.1f}s")


if __name__ == "__main__":
    main()
