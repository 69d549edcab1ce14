"""Zero-section integral, section integral and index sum for every built-in pair."""

import argparse

from supereuler import geometry as geo
from supereuler.euler import MQContext, euler_integral, hopf_indices

PAIRS = [
    ("sphere2", "height-gradient", 128),
    ("sphere2", "rotation", 128),
    ("torus2", "sines", 128),
    ("flat_torus2", "sines", 64),
    ("sphere4", "height-gradient", 16),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--skip-4d", action="store_true")
    args = ap.parse_args()
    print(f"{'manifold':12s} {'section':16s} {'chi(s=0)':>16s} {'chi(s)':>16s} {'index sum':>10s}")
    for name, section, k in PAIRS:
        if args.skip_4d and name == "sphere4":
            continue
        M = geo.builtin_manifold(name)
        zero = MQContext(M, geo.builtin_section("zero", M), nodes=k)
        sec = MQContext(M, geo.builtin_section(section, M), nodes=k)
        a = euler_integral(zero).chi
        b = euler_integral(sec, args.t).chi
        h = hopf_indices(sec).total
        print(f"{name:12s} {section:16s} {a:16.12f} {b:16.12f} {h:10d}")


if __name__ == "__main__":
    main()
