"""Integral along the family s_t = t s, including large t where the integrand localizes."""

import argparse
import json

from supereuler import geometry as geo
from supereuler.euler import MQContext, thom_family_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--manifold", default="sphere2")
    ap.add_argument("--section", default="height-gradient")
    ap.add_argument("--grid", type=int, default=128)
    ap.add_argument("--t", default="0,0.25,0.5,1,2,4,8,16")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    M = geo.builtin_manifold(args.manifold)
    ctx = MQContext(M, geo.builtin_section(args.section, M), nodes=args.grid)
    rep = thom_family_scan(ctx, [float(x) for x in args.t.split(",")])
    if args.json:
        print(json.dumps(rep.to_dict(), indent=2))
        return
    for r in rep.results:
        print(f"t={r.t:6.2f}  chi={r.chi:.12f}  half-grid change={r.convergence_estimate:.2e}")
    print(f"max deviation {rep.max_deviation:.2e}")


if __name__ == "__main__":
    main()
