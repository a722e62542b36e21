"""Transmission asymmetry of the gain/loss three-resonator center over (phi, gamma).

Writes a CSV of ``|t_R / t_L|`` and ``|r_R / r_L|`` at a fixed momentum,
marking points where the coefficients diverge.  The unidirectional point
``gamma = 1, phi = -pi/2`` shows up as ``t_L = 0``.
"""
import argparse
import csv
import math
import sys

import numpy as np

from symscatter.models import get_model
from symscatter.scattering import two_port


def ratio(a, b):
    if abs(a) < 1e-12 and abs(b) < 1e-12:
        return 1.0
    return abs(a) / abs(b) if abs(b) >= 1e-12 else math.inf


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=float, default=-math.pi / 2)
    ap.add_argument("--phi-points", type=int, default=61)
    ap.add_argument("--gamma-max", type=float, default=3.0)
    ap.add_argument("--gamma-points", type=int, default=61)
    ap.add_argument("--out", default="-", help="CSV path, or - for stdout")
    args = ap.parse_args(argv)

    phis = np.linspace(-math.pi, math.pi, args.phi_points)
    gammas = np.linspace(0.0, args.gamma_max, args.gamma_points)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["phi", "gamma", "abs_tL", "abs_tR", "ratio_t", "ratio_r", "divergent"])
    n_div = 0
    for phi in phis:
        for gamma in gammas:
            c = two_port(get_model("unidirectional", gamma=gamma, phi=phi).network, 1, 3, args.k)
            n_div += c.divergent
            w.writerow([f"{phi:.6f}", f"{gamma:.6f}", f"{abs(c.t_l):.10g}", f"{abs(c.t_r):.10g}",
                        f"{ratio(c.t_r, c.t_l):.10g}", f"{ratio(c.r_r, c.r_l):.10g}", int(c.divergent)])
    if fh is not sys.stdout:
        fh.close()
    print(f"{len(phis) * len(gammas)} points, {n_div} divergent", file=sys.stderr)


if __name__ == "__main__":
    main()
