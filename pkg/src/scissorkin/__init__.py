"""Screw-theory kinematics for triple scissors deployable antenna units."""
from .constraint_dof import assemble_constraints, dof, loop_basis, numeric_dof_oracle
from .deploy_sim import DriveProfile, compare_units, node_stats, ring_assembly, simulate, theta_of_t
from .errors import (
    AlignmentError, ConsistencyError, DisconnectedGraphError, DomainError, DriveSelectionError,
    FormatError, MobilityError, OracleError, ScissorKinError,
)
from .kinematics import kinematic_state, propagate_accel, propagate_velocity, solve_accels, solve_rates
from .mech_model import (
    DesignParams, MechanismModel, build_unit, design_report, four_bar, link_lengths, open_chain, reference_unit,
    rigid_triangle,
)
from .screw_algebra import SpatialAccel, Twist, lie_bracket, revolute_screw

__version__ = "0.1.0"
