"""Ball growing against exact optima on small random graphs."""
from fractions import Fraction

from congestlab.algos import run_algorithm
from congestlab.graph import assign_ids, assign_ports, gen_gnp
from congestlab.oracles import solve


def main() -> None:
    eps = Fraction(1, 2)
    print(f"eps = {eps}; packing problems need size >= opt/(1+eps), covering size <= (1+eps) opt")
    print(f"{'seed':>4} {'n':>3} {'m':>4}  " + "  ".join(f"{p:>14s}" for p in
                                                       ("MaxIS", "MDS", "MVC", "MaxM")))
    for seed in range(6):
        g = assign_ports(assign_ids(gen_gnp(24, 0.15, seed), seed), seed)
        cells = []
        for problem in ("MaxIS", "MDS", "MVC", "MaxM"):
            res, out = run_algorithm("ball-growing", g, {"problem": problem, "eps": eps},
                                     seed=seed)
            opt = solve(g, problem).size
            cells.append(f"{out.solution.size:>2}/{opt:<2} {res.messages:>7}m")
        print(f"{seed:>4} {g.n:>3} {g.m:>4}  " + "  ".join(cells))
    print("cells: found/optimum and the message count")


if __name__ == "__main__":
    main()
