"""Z-actions on Z^n and the groups Z^n x|_phi Z: exact arithmetic, word metrics,
orbit intersections, Sol geometry and coset growth."""

from .cayley import (Ball, GrowthSeries, Unreached, ball, coset_distance, element_budget, fit_growth,
                     growth_series, set_distance, word_distance)
from .cosetlab import (ClumpReport, CosetDistanceTable, CosetGrowthSeries, ball_vs_clump_demo,
                       coset_growth, fiberwise_separation, half_distance_check, max_clump)
from .errors import (BudgetExceeded, CertificationError, CoincidentOrbitsError, HypothesisError,
                     InvariantViolation, NotUnimodularError, PolypackError)
from .group import CyclicSubgroup, Element, Presentation, coset_rep
from .orbits import (find_separated_pair, intersection_sweep, lattice_points_in_ball, min_separation,
                     orbit_intersection_count, packing_bound, translated_intersection_count,
                     truncated_orbit)
from .solgeo import (SolPoint, distortion_check, embed, sol_lower_bound, sol_path_length,
                     sol_upper_bound)
from .spectral import (AdaptedNorm, IntMatrix, OrbitKind, adapted_norm, classify_orbit, mat_pow,
                       spectral_decompose)

__version__ = "0.1.0"
