"""Fitted contraction slopes of coupled free-SDE paths for ½x² + a·x⁴/4 as a grows.

The certified constant is c = 1 for every a ≥ 0, so each slope should sit below −½.

    python scripts/contraction_rates.py --quartic 0 0.5 1 2
"""

import argparse
from dataclasses import dataclass, field
from typing import List

from freetransport.freesde import PotentialFamily, coupled_contraction
from freetransport.ncalg.potential import PotentialSpec
from freetransport.noise import gue, stream


@dataclass
class Experiment:
    quartic: List[float] = field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0])
    N: int = 16
    T: float = 6.0
    dt: float = 1e-3
    seed: int = 0


def main(exp: Experiment) -> list:
    rng = stream(exp.seed, 0)
    X0, Y0 = gue(rng, (1,), exp.N), 1.5 * gue(rng, (1,), exp.N)
    rows = []
    for a in exp.quartic:
        spec = PotentialSpec.one_var(1, 0, a) if a else PotentialSpec.quartic([[0.5]], [[0]], [0], [[1, 0, 1]])
        fam = PotentialFamily(spec.to_ncpoly(), "0", V_spec=spec)
        c = coupled_contraction(X0, Y0, fam, 0.0, exp.T, exp.dt, seed=exp.seed + 1)
        rows.append({"a": a, "slope_fro": c.slope_fro, "slope_op": c.slope_op})
        print(f"a={a:4.2f}  slope (Frobenius) {c.slope_fro:+.4f}  slope (operator) {c.slope_op:+.4f}", flush=True)
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--quartic", type=float, nargs="+", default=Experiment().quartic)
    ap.add_argument("--N", type=int, default=Experiment().N)
    ap.add_argument("--T", type=float, default=Experiment().T)
    ap.add_argument("--dt", type=float, default=Experiment().dt)
    main(Experiment(**vars(ap.parse_args())))
