"""Exact secondary-fan and SOD-multiplicity computations for toric GIT problems."""

__version__ = "0.1.0"

from .problem import (  # noqa: F401
    GitProblem,
    from_points,
    from_weights,
    associated_cy,
    delete_weight,
    minimal_faces,
    relevant_subspaces,
    subquotient,
)
from .fan import build_fan, chamber_of, minimal_chambers, straight_line_run  # noqa: F401
from .subdivision import (  # noqa: F401
    MarkedSubdivision,
    localized_equal,
    regular_subdivision,
    subdivision_of_chamber,
    uses_base_point,
)
from .stacky import (  # noqa: F401
    minimal_phase_rank,
    minimal_phase_rank_oracle,
    stacky_fan_of_chamber,
    stacky_volume,
)
from .multiplicity import (  # noqa: F401
    decorated_complex_A,
    decorated_complex_B,
    check_balancing,
    run_accumulate,
    solve_recursive,
    tropical_intersection,
    verify_theorem,
    wall_multiplicities,
)
