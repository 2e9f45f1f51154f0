"""Planar kneed biped: rigid-contact dynamics, consensus block wiring, and
the receding-horizon walking driver."""

from .model import (WalkerModel, bias_forces, centroidal_inertia,
                    centroidal_momentum_matrix, com_jacobian, com_position,
                    contact_dynamics, contact_force, foot_jacobian,
                    foot_position, impact_velocity_projection,
                    kinetic_energy, leg_inverse_kinematics, mass_matrix,
                    point_positions, posture_from_feet, potential_energy,
                    static_hold_controls, swap_stance_coordinates,
                    wholebody_step)
from .blocks import (Terrain, WalkerScenario, assemble_generalized_state,
                     build_centroidal_cost, build_wholebody_cost,
                     centroidal_system, swing_reference, walker_blocks,
                     wholebody_quantities, wholebody_system)
from .walking import (DEFAULT_EPS_COST, DEFAULT_EPS_PRI, ROUGH_EPS_PRI,
                      WalkingResult, WalkingStep, flat_scenario,
                      generalized_state_path, initial_state, run_walking,
                      solve_step, stairs_scenario)

__all__ = [name for name in dir() if not name.startswith("_")]
