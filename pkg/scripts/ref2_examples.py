"""The worked Ref² examples and the regression set, with verdicts."""

import argparse

from rwsos import ref2 as F
from rwsos.equivalence import Relation2
from rwsos.experiments import ref2_regression
from rwsos.parse import parse_program


def ref(text):
    return parse_program("ref2", text)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-size", type=int, default=4)
    ap.add_argument("--fuel", type=int, default=200)
    args = ap.parse_args()
    stores = F.default_stores()

    readers = [ref(x) for x in ("skip", "#0 := 1", "while !#0 { #0 := !#0 (-) 1 }", "while 1 { skip }")]
    T = F.skipping_relation(readers, stores)
    print("skip-ing relation:   ", F.check_ho_termination_sim(T, stores, args.fuel))
    Q = F.proc_assignment_relation(T, F.Loc(0), stores)
    print("proc assignment:     ", F.check_ho_termination_sim(Q, stores, args.fuel))

    a, b = ref("#0 := 2; #0 := expr (!#0 (+) 2)"), ref("#0 := 2; #0 := expr (!#0 (+) !#0)")
    s0 = F.RefStore({0: 0})
    print("2+2 results:         ", F.ref_run(a, s0, 100), F.ref_run(b, s0, 100))
    print("2+2 both ways:       ", *F.certify_both_ways(a, b, stores, args.fuel))

    k1 = ref("#0 := proc { expr !#0 } ; expr !#0")
    k2 = ref("#0 := proc { while 1 { skip } } ; expr !#0")
    R = Relation2(frozenset({(k1, k2), (k2, k1)}), frozenset(), True)
    print("Landin adequacy:     ", F.check_adequacy(R, stores, 500))
    print("skip vs loop:        ", F.ctx_refute(F.SKIP, ref("while 1 { skip }"), args.max_size).show())

    print("\nregression set (certified both ways -> context search):")
    for o in ref2_regression(args.max_size, args.fuel):
        print(f"  {o.name:<16} certified={o.certified!s:<5} {o.refutation or ''}")


if __name__ == "__main__":
    main()
