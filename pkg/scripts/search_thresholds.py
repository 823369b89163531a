"""Multistart search for BC^4 violations in Conv({p_iso(eps)} u locals) over an eps sweep.

Shows where the optimizer first reports a value above the tolerance, which is
the practical detection threshold of the search (not a proof of classicality
below it).
"""

import argparse
import csv
import sys
from fractions import Fraction

from entropic_bell import search


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=float, default=1.0)
    ap.add_argument("--restarts", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--numerators", default="4,4.00001,4.001,4.05,4.1,4.2,4.5",
                    help="eps = numerator / 7")
    args = ap.parse_args(argv)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["eps_times_7", "q", "best", "label", "weight_on_p_iso"])
    for num in args.numerators.split(","):
        eps = Fraction(num) / 7
        prob = search.SearchProblem(search.search_generators(eps), q=args.q,
                                    restarts=args.restarts, seed=args.seed)
        res = search.maximize_bc(prob)
        w.writerow([num, args.q, f"{res.best_value:.6e}", res.label, f"{res.best_weights[0]:.6e}"])


if __name__ == "__main__":
    main()
