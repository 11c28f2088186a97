"""Three regimes of SLE seen through sampled traces.

For kappa = 2, 6 and 8 we sample a handful of traces up to capacity time 1
and measure two things: how often a trace comes back near the real axis
away from its starting point, and how often it nearly touches itself.
Simple curves (kappa <= 4) do neither; at kappa = 6 both happen; at
kappa = 8 the trace fills space and the self-approach is everywhere.

Run:  python demos/phases.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from sle_lab.sampler import KappaContext, SamplerConfig, near_self_intersection, sample_trace, touches_boundary

N_TRACES = 20
N_STEPS = 4000
# a discrete trace stays about 3 sqrt(dt) above the axis, so delta sits above that
DELTA = 0.1


def main(out_dir=None):
    out = Path(out_dir) if out_dir else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for kappa in (2.0, 6.0, 8.0):
        ctx = KappaContext(kappa)
        traces = [sample_trace(ctx, SamplerConfig(1.0, N_STEPS, sample_index=i)) for i in range(N_TRACES)]
        touch = np.mean([touches_boundary(t, DELTA, 3 * DELTA) for t in traces])
        # pairs must be far apart along the curve, or sub-step zigzags count as loops
        loops = np.mean([near_self_intersection(t, 0.02, separation=50) for t in traces])
        height = np.mean([t.points.imag.max() for t in traces])
        print(f"kappa={kappa:g} ({ctx.phase}): d_f={ctx.d_f:.3f}  axis returns {touch:.2f}  "
              f"self-approach {loops:.2f}  mean height {height:.3f}")
        if out:
            traces[0].to_csv(out / f"trace_kappa{kappa:g}.csv")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
