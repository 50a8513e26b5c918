"""Curvature measures and kinematic formulas for piecewise-linear complexes."""

from .complex import (ComplexError, EmbeddedComplex, Face, close_under_faces, euler_characteristic,
                      format_plc, load_plc, parse_plc, save_plc, subdivide_barycentric, validate)
from .curvature import (B0, SIGMA, TAU, CurvatureMap, direction_census, face_measure, index,
                        morse_counts, total_curvature, vertex_measure, vertex_measure_exact, wk,
                        wk_all)
from .geom import (Box, Flat, Motion, RngStream, estimate_cnk, flat_pairing, kinematic_constant,
                   random_rotation, random_rotations)
from .homology import BettiVector, betti, pair_betti
from .kinematic import (KinematicConfig, check_factorization_averaged,
                        check_factorization_orthogonal, graff_integral, kinematic_lhs,
                        kinematic_rhs, linear_kinematic, translation_coincidence_measure,
                        verify_kinematic)
from .shapes import SHAPES, generate
from .slicing import (Degenerate, GeometryDegeneracy, NearDegenerate, complex_intersection,
                      directional_link, flat_section, hyperplane_section,
                      simplex_pair_intersection)
from .stats import Estimate, MeasureEstimate, Report, VerificationReport

__version__ = "0.1.0"
