"""Steering certification from two-party qubit correlation data."""

from .inequalities import InequalityReport, chsh_like_steering, dbs, linear_steering, ris
from .quantum import (
    Assemblage,
    CorrelationMatrix,
    DensityMatrix,
    JointDistribution,
    MeasurementSet,
    MeasurementSetting,
    assemblage_from_state,
    correlation_matrix,
    fidelity_with_pure,
    joint_distribution,
    projective_setting,
    signalling_magnitude,
    singlet_state,
    werner_state,
)
from .sdp import (
    NsaResult,
    SteeringFunctional,
    adapted_steering_robustness,
    enumerate_strategies,
    evaluate_witness,
    nonsignalling_projection,
    steering_robustness,
)

__version__ = "0.1.0"
