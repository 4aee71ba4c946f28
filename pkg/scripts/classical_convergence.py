"""Classical 1-d transport e^{−x²/2} → e^{−x²/2−x⁴/4}: error against the quantile map
as the number of α steps grows, for Heun and RK4.

    python scripts/classical_convergence.py --steps 4 8 12 16
"""

import argparse
import time
from dataclasses import dataclass, field
from typing import List

import numpy as np

from freetransport.onevar import GibbsDensity, classical_transport_1d, quantile_transport


@dataclass
class Experiment:
    steps: List[int] = field(default_factory=lambda: [4, 8, 12, 16])
    schemes: List[str] = field(default_factory=lambda: ["heun", "rk4"])
    lo: float = -6.0
    hi: float = 6.0
    points: int = 2048


def main(exp: Experiment) -> list:
    V, W = [0, 0, 0.5], [0, 0, 0, 0, 0.25]
    x = np.linspace(exp.lo, exp.hi, exp.points)
    oracle = quantile_transport(GibbsDensity(V), GibbsDensity(np.add(W, [0, 0, 0.5, 0, 0])), x)
    rows = []
    for scheme in exp.schemes:
        for m in exp.steps:
            t0 = time.perf_counter()
            res = classical_transport_1d(V, W, x, alpha_steps=m, scheme=scheme)
            err = res.F.sup_diff(oracle)
            rows.append({"scheme": scheme, "steps": m, "sup_error": err, "seconds": time.perf_counter() - t0})
            print(f"{scheme:5s} steps={m:3d} sup error {err:.3e}  ({rows[-1]['seconds']:.1f}s)", flush=True)
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--steps", type=int, nargs="+", default=Experiment().steps)
    ap.add_argument("--schemes", nargs="+", default=Experiment().schemes)
    ap.add_argument("--points", type=int, default=Experiment().points)
    main(Experiment(**vars(ap.parse_args())))
