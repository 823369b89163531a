"""Write the BC^4 curve of p_e and of p_C over q in [1, 3] as CSV (plot-ready)."""

import csv
import sys

from entropic_bell import catalog, search

if __name__ == "__main__":
    steps = int(sys.argv[1]) if len(sys.argv) > 1 else 201
    pe = search.q_sweep(catalog.pe(), (1.0, 3.0), steps)
    pc = search.q_sweep(catalog.p_c2233(), (1.0, 3.0), steps)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["q", "p_e", "p_C"])
    for q, a, b in zip(pe.qs, pe.values, pc.values):
        w.writerow([f"{q:.4f}", f"{a:.12e}", f"{b:.12e}"])
    print(f"# violation interval {pe.violation_interval}", file=sys.stderr)
