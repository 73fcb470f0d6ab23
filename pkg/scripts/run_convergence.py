#!/usr/bin/env python3
"""Medium-gap convergence experiment: exact values vs closed forms.

Sweeps the horizons at the two prefactor-maximizing gap scales and
writes one convergence CSV per scale, printing the normalized values
next to the limiting prefactors.
"""

import argparse
import math

from symbandit import pde
from symbandit.experiments import (
    CONVERGENCE_COLUMNS,
    SweepSpec,
    convergence_sweep,
    write_csv,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--T-list", default="100,400,1600,6400")
    ap.add_argument("--out-prefix", default="convergence")
    args = ap.parse_args()
    T_list = [int(x) for x in args.T_list.split(",")]

    for tag, gamma, limit in (
        ("regret", 0.707, pde.prefactor_c(0.707)),
        ("pseudoregret", 1.274, pde.prefactor_c_bar(1.274)),
    ):
        spec = SweepSpec(regime="medium", T_list=T_list, gamma=gamma)
        rows = convergence_sweep(spec)
        out = f"{args.out_prefix}_{tag}.csv"
        write_csv(out, CONVERGENCE_COLUMNS, rows,
                  {"config": f"run_convergence gamma={gamma} T_list={args.T_list}"})
        print(f"{tag}: gamma = {gamma}, limit prefactor = {limit:.6f}")
        key = "v_norm" if tag == "regret" else "vbar_norm"
        for row in rows:
            print(f"  T={row['T']:>6d}  {key}={row[key]:.6f}  "
                  f"dev={abs(row[key] - limit):.2e}")
        print(f"  -> {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
