#!/usr/bin/env python3
"""Survey finite endomorphisms of small cusp singularities.

For each periodic cycle, print the quadratic irrational, the fundamental
totally positive unit, the smallest endomorphism datum giving an irrational
rotation, and the first dynamical degree of its induced skeleton map.

    python scripts/rotation_survey.py [max_entry]
"""

import itertools
import sys

from valdyn.cusp import (
    CuspData,
    cusp_dual_graph,
    fundamental_unit,
    induced_skeleton_map,
    irrational_example,
    rotation_number,
)
from valdyn.dynamics import dynamical_degree


def survey(max_entry: int = 5) -> None:
    header = f"{'cycle':<12} {'omega':<22} {'eps':<22} {'alpha':<22} {'deg':>4} {'beta':>10} {'c_inf':<12}"
    print(header)
    print("-" * len(header))
    seen = set()
    for r in (1, 2):
        for cycle in itertools.product(range(2, max_entry + 1), repeat=r):
            if all(k == 2 for k in cycle):
                continue
            if cycle in seen:
                continue
            seen.add(cycle)
            s = 2 if r == 1 else 1
            cusp = CuspData(cycle, s)
            eps = fundamental_unit(cusp)
            alpha = irrational_example(cusp)
            beta = rotation_number(alpha, cusp).beta_float
            fm = induced_skeleton_map(alpha, cusp)
            deg = dynamical_degree(fm)
            graph = cusp_dual_graph(cusp)
            print(
                f"{str(list(cycle)):<12} {str(cusp.omega):<22} {str(eps):<22} "
                f"{str(alpha):<22} {int(alpha.norm()):>4} {beta:>10.6f} "
                f"x^2-{-deg.minpoly[2] if len(deg.minpoly) == 3 else deg.minpoly[1] ** 2}"
            )


if __name__ == "__main__":
    survey(int(sys.argv[1]) if len(sys.argv) > 1 else 5)
