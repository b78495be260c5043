#!/usr/bin/env python3
"""Sandwich experiment: tabulate lower/middle/upper values and convolution
deviations for the measure-reprepare channel over a range of scalings c,
optionally dumping the upper-symbol field for plotting.

Example:
    python scripts/run_berezin_sandwich.py --c 1.5 2 3 --outdir results/
"""

import argparse
import json
import pathlib

from gausslab import fock
from gausslab import husimi as hu
from gausslab import majorization as mj


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c", type=float, nargs="+", default=[1.5, 2.0, 3.0])
    ap.add_argument("--cutoff", type=int, default=128)
    ap.add_argument("--grid-radius", type=float, default=6.0)
    ap.add_argument("--grid-step", type=float, default=0.05)
    ap.add_argument("--dump-fields", action="store_true")
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    grid = hu.make_grid(args.grid_radius, args.grid_step)
    space = fock.FockSpace(1, 40)
    probes = {
        "vacuum": fock.vacuum_state(space),
        "fock1": fock.number_state(space, 1),
        "coherent0.7": fock.coherent_state(0.7, space),
    }
    f = mj.von_neumann_functional()
    table = {}
    ok = True
    for c in args.c:
        for pname, probe in probes.items():
            rep = hu.berezin_lieb_check(probe, c, 0.5, 0.5, f, grid,
                                        cutoff=args.cutoff)
            conv = hu.convolution_check(probe, c, 0.5, 0.5, grid,
                                        cutoff=args.cutoff)
            key = f"c={c:g},{pname}"
            table[key] = {"lower": rep.lower, "middle": rep.middle,
                          "upper": rep.upper, "min_slack": rep.min_slack,
                          "convolution_deviation": conv.sup_deviation}
            ok &= rep.sandwiched(1e-3) and conv.sup_deviation <= 2e-3
            print(f"{key}: {rep.lower:.5f} <= {rep.middle:.5f} <= {rep.upper:.5f} "
                  f"(conv dev {conv.sup_deviation:.2e})")
            if args.dump_fields:
                field = hu.upper_symbol(probe, c, 0.5, 0.5, grid, cutoff=args.cutoff)
                hu.field_to_csv(field, outdir / f"upper_symbol_{key.replace('=', '')}.csv")
    with open(outdir / "berezin_sandwich.json", "w", encoding="utf-8") as fh:
        json.dump(mj.to_jsonable(table), fh, indent=2, sort_keys=True)
    print("ALL PASS" if ok else "VIOLATIONS FOUND")
    return 0 if ok else 2


if __name__ == "__main__":
    raise SystemExit(main())
