"""Normal bundles, principal curvatures and support measures of closed sets
in the plane and in space, built on exact distance oracles."""

from .bundle import (Bundle, BundlePoint, MeasureEstimate, integrate_bundle, lift_to_bundle,
                     sample_bundle, sample_level_set)
from .curvature import (CurvatureData, SymmetricFunctionValue, compare_with_smooth, curvature_at,
                        kappa_from_chi, symmetric_function)
from .differential import DiffFrame, check_differential_identities, jacobians
from .errors import *  # noqa: F401,F403
from .measures import (alpha, coarea_check, infinite_curvature_census, mu_global, mu_stratified,
                       steiner_fit)
from .projection import ProjectedPoint, dilate, is_regular, psi, reach_function, rho
from .scene import (AxisBox, Ball, BallComplement, ConvexPolytope, Point, PointCloud, Scene,
                    Segment, delta, nearest_set, xi)
from .strata import StratumLabel, classify_stratum, restrict_bundle

__version__ = "0.1.0"
