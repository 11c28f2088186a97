"""Percolation exploration paths against SLE_6.

An exploration path on the triangular lattice keeps grey hexagons on its
left.  Its left-passage frequency at a bulk point should match the kappa = 6
formula, and the agreement should improve as the lattice radius grows
(the point is kept at the same relative position).

Run:  python demos/percolation_vs_sle6.py [n_samples]
"""

import sys

from sle_lab.formulas import left_passage_prob
from sle_lab.percolation import lattice_left_passage


def main(n_samples=1000):
    target = left_passage_prob(6.0, 1.0, 1.0)
    print(f"SLE_6 left passage at z = 1 + i: {target:.4f}")
    for radius in (40, 80, 160):
        z = complex(radius / 8, radius / 8)
        e = lattice_left_passage(z, radius, n_samples, seed=3)
        print(f"radius {radius:4d}: lattice {e.value:.4f} +- {e.std_error:.4f} "
              f"(shift {e.value - target:+.4f}, truncated {e.unresolved})")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 1000)
