"""Source localisation from arrival times in l_p spaces by refining covers."""
from .cover import Coverand, CoverFamily, ball, ray_segment, subdivide
from .epsnet import coordinate_balls, run_sequence
from .problem import DefectKind, GroundTruth, SrpInstance, defect
from .rc import Halt, RcConfig, SolveReport, rc_sequence, rc_solve
from .space import LpSpace, distance, norm
from .sphere import sphere_solve

__version__ = "0.1.0"

__all__ = [
    "Coverand",
    "CoverFamily",
    "DefectKind",
    "GroundTruth",
    "Halt",
    "LpSpace",
    "RcConfig",
    "SolveReport",
    "SrpInstance",
    "ball",
    "coordinate_balls",
    "defect",
    "distance",
    "norm",
    "ray_segment",
    "rc_sequence",
    "rc_solve",
    "run_sequence",
    "sphere_solve",
    "subdivide",
]
