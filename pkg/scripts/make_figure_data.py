#!/usr/bin/env python3
"""Emit the prefactor curves c(gamma), cbar(gamma) over a gamma grid."""

import argparse

from symbandit.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", default="0.01:5:0.01")
    ap.add_argument("--out", default="figure_c.csv")
    args = ap.parse_args()
    return cli_main(["figure", "--grid", args.grid, "--out", args.out])


if __name__ == "__main__":
    raise SystemExit(main())
