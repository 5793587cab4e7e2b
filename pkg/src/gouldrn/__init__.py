"""Set-valued measure theory on finite spaces: convex-body arithmetic with
the Hausdorff metric, Gould integration against (multi)submeasures and
Radon-Nikodym derivatives built from exhaustions."""

from .convex import ConvexBody, SupportFn, embed, hausdorff, interval, minkowski_sum, mk_body, norm_h, polygon
from .errors import GouldError, HypothesisFailed
from .gould import Integrand, integral_measure, integrate
from .rn import approximate_range, rn_derive, verify_rn
from .setfn import MultiSetFn, ScalarSetFn, classify, variation
from .space import FiniteSpace, MSet, Partition

__version__ = "0.1.0"

__all__ = [
    "ConvexBody", "SupportFn", "embed", "hausdorff", "interval", "minkowski_sum", "mk_body", "norm_h", "polygon",
    "GouldError", "HypothesisFailed", "Integrand", "integral_measure", "integrate",
    "approximate_range", "rn_derive", "verify_rn", "MultiSetFn", "ScalarSetFn", "classify", "variation",
    "FiniteSpace", "MSet", "Partition",
]
