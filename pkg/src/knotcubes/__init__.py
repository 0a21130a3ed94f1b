"""Little cubes acting on spaces of long knots."""
__version__ = "0.1.0"

from .geometry import (AffineInc, CAutElement, LittleCube, cube_apply, cube_compose,
                       cube_inverse, cube_project, cubes_disjoint)
from .operad import CubeConfig, height_permutation, operad_compose, symmetric_action
from .knots import (ImmersedKnotPL, LongKnotPL, eval_knot, is_embedding_pl,
                    is_embedding_sampled, perturb, reach_estimate)
from .library import KNOT_NAMES, standard_knot

__all__ = [
    "AffineInc", "CAutElement", "LittleCube", "cube_apply", "cube_compose", "cube_inverse",
    "cube_project", "cubes_disjoint", "CubeConfig", "height_permutation", "operad_compose",
    "symmetric_action", "ImmersedKnotPL", "LongKnotPL", "eval_knot", "is_embedding_pl",
    "is_embedding_sampled", "perturb", "reach_estimate", "KNOT_NAMES", "standard_knot",
]
