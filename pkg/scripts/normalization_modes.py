"""Compare the three normalizations of the Gaussian form on the surfaces.

``eqU`` uses the Pfaffian of half the curvature with the sign-free source
sum, ``eqU1`` exponentiates the curvature and source literally, and
``calibrated`` fixes the curvature coupling on the unit sphere.
"""

from supereuler import geometry as geo
from supereuler.euler import MODES, MQContext, euler_integral, normalization_constant

CASES = [("sphere2", "zero"), ("sphere2", "height-gradient"), ("torus2", "sines"), ("sphere2", "rotation")]


def main():
    print("constants: " + ", ".join(f"{m}={normalization_constant(m)!r}" for m in MODES))
    print(f"{'case':28s}" + "".join(f"{m:>18s}" for m in MODES))
    for name, section in CASES:
        M = geo.builtin_manifold(name)
        s = geo.builtin_section(section, M)
        row = [euler_integral(MQContext(M, s, mode, 96)).chi for mode in MODES]
        print(f"{name + '/' + section:28s}" + "".join(f"{x:18.10f}" for x in row))


if __name__ == "__main__":
    main()
