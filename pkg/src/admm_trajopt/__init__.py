"""Trajectory optimization by multi-block ADMM operator splitting."""

from .core import (DimensionError, DynamicalSystem, NumericalError, Trajectory,
                   finite_diff_jacobian, rollout)
from .ddp import (DdpProblem, DdpSettings, DdpSolution, NotPositiveDefinite,
                  RolloutDiverged, backward_pass, forward_pass, solve)
from .projection import (AdmissibleSets, project_block, project_box,
                         project_friction_cone_2d)
from .admm import (AccelerationConfig, AdmmBlocks, AdmmResult, AdmmTrace,
                   ConstraintId, CouplingState, Decision, StoppingCriteria,
                   Variant, adapt_penalty, check_stopping, compute_residuals,
                   dual_update, relax, solve_admm)

__version__ = "0.1.0"
