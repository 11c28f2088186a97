"""Which side of a point does the SLE trace pass?

The closed-form left-passage probability depends only on x/y.  Here it is
tabulated along a horizontal line for three values of kappa and, at a few
points, compared with a Monte-Carlo estimate from the bulk diffusion
q_t = Re w / Im w.

Run:  python demos/left_passage.py [n_samples]
"""

import sys

import numpy as np

from sle_lab.formulas import left_passage_prob
from sle_lab.montecarlo import estimate_left_passage


def main(n_samples=2000):
    xs = np.linspace(-3, 3, 7)
    print("x/y    " + "  ".join(f"kappa={k:<5g}" for k in (2, 8 / 3, 6)))
    for x in xs:
        print(f"{x:+.1f}   " + "  ".join(f"{left_passage_prob(k, x, 1.0):.6f}  " for k in (2, 8 / 3, 6)))
    print()
    for kappa, z in ((6.0, 1j), (8 / 3, 1 + 1j), (2.0, -1 + 1j)):
        e = estimate_left_passage(kappa, z, n_samples, seed=1)
        print(f"kappa={kappa:.4g} z={z}: MC {e.value:.4f} +- {e.std_error:.4f}, exact {e.target:.4f}, "
              f"z-score {e.z_score:+.2f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 2000)
