"""The two matching algorithms: a two-round proposal scheme and the
rotation walk on a dense random graph."""
import math
import statistics

from congestlab.algos import run_algorithm
from congestlab.graph import gen_gnp, random_regular
from congestlab.oracles import exact_maxm


def main() -> None:
    g = random_regular(60, 3, 1)
    opt = exact_maxm(g).size
    sizes, msgs = [], []
    for seed in range(200):
        res, out = run_algorithm("propose-matching", g, {"alpha": 0.5}, seed=seed)
        sizes.append(out.solution.size)
        msgs.append(res.messages)
    print(f"propose, 3-regular n=60: mean size {statistics.fmean(sizes):.2f} of {opt}, "
          f"mean messages {statistics.fmean(msgs):.1f} (<= 3n = 180)")

    n = 128
    g = gen_gnp(n, min(1.0, 12 * math.log(n) / n), 2)
    res, out = run_algorithm("rotation-matching", g, {}, seed=2)
    print(f"rotation, G({n}, {12 * math.log(n) / n:.2f}): size {out.solution.size} "
          f"(perfect = {n // 2}), failed={out.failed}, messages {res.messages} "
          f"= {res.messages / (n * math.log(n)):.1f} n ln n, rounds {res.rounds}")


if __name__ == "__main__":
    main()
