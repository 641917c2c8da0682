"""Tabulate which scalar condition each x1 profile branch satisfies.

For every (branch, signature) pair the script builds the x1 family, verifies
it on a grid and prints the realized <N,N>, the maxima of both scalar
conditions and the vector residual.

    python3 scripts/branch_resolution.py [--grid 6x3x3]
"""
import argparse

from bicons4.biconservative import grid_verify
from bicons4.families import build_family

C1 = {"riemannian": 1.0, "lorentzian": 2.0}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", default="6x3x3")
    args = ap.parse_args()
    shape = tuple(int(n) for n in args.grid.split("x"))
    print(f"{'branch':6} {'signature':11} {'eps':>3} {'riemannian':>11} {'lorentzian':>11} "
          f"{'residual':>9}  passed")
    for branch in ("minus", "plus"):
        for sig, c1 in C1.items():
            sm = grid_verify(build_family("x1", {"signature": sig, "c1": c1, "branch": branch}),
                             shape)
            print(f"{branch:6} {sig:11} {sm.epsilon:+3d} {sm.max_scalar_riemannian:11.2e} "
                  f"{sm.max_scalar_lorentzian:11.2e} {sm.max_residual:9.2e}  {sm.passed}")


if __name__ == "__main__":
    main()
