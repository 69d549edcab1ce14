"""Grassmann algebra, Berezin integrals and Pfaffians, applied to Euler-class integrals on small manifolds."""

from .superalg import Grassmann, Layout, MultiIndex, berezin, epsilon_sign, exp_even, super_bracket
from .pfaffian import (
    OddVector,
    SkewMatrix,
    berezin_gaussian_source,
    gaussian_expand,
    pfaffian_berezin,
    pfaffian_expansion,
)
from .geometry import builtin_manifold, builtin_section
from .euler import MQContext, disk_compress, disk_decompress, euler_integral, hopf_indices, thom_family_scan

__version__ = "0.1.0"
