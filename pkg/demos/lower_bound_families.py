"""Build the lower-bound graph families, solve them exactly and compare the
optimum with the value each construction predicts."""
import random

from congestlab.lbgraphs import (check_separation, crossed_member, eligible_crossings,
                                 intersects, mds_exact_family, mds_fixed_member,
                                 mvc_exact_family)
from congestlab.oracles import verify_instance


def main() -> None:
    rng = random.Random(0)
    print("layered families, k=2, l=2")
    for _ in range(4):
        x = [rng.randint(0, 1) for _ in range(4)]
        y = [rng.randint(0, 1) for _ in range(4)]
        for build in (mvc_exact_family, mds_exact_family):
            inst = build(2, 2, x, y)
            rep = verify_instance(inst)
            sep = check_separation(inst, oracle=False)
            print(f"  {inst.family:9s} x={x} y={y} intersect={intersects(x, y)!s:5s} "
                  f"-> {rep.line()}  separation ok={sep.ok}")

    print("\nconstant-gap dominating set family, n=4")
    fixed = mds_fixed_member(4)
    print("  fixed member:", verify_instance(fixed).line())
    for p, q in eligible_crossings(fixed, 1, 1):
        crossed = crossed_member(fixed, 1, 1, p, q)
        print(f"  crossed with a1^{p}-a2^{q}:", verify_instance(crossed).line())


if __name__ == "__main__":
    main()
