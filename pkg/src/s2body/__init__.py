"""Point masses on the sphere and in flat space, the rotating-frame rigid
reduction, closed-form free rigid-body motion, and numerical checks that
rigid motions are uniform rotations.
"""
from .analysis import (CoefficientVectors, RelativeEquilibriumFit,
                       RigidityReport, SeriesCoefficients, TorqueResidual,
                       coefficient_vectors, find_relative_equilibrium,
                       fit_constant_omega, monomial_gram_rank,
                       per_body_torque_residual, rigidity_check,
                       separatrix_system, series_coefficient_matrix,
                       series_coefficients, verify_theorem)
from .dynamics import (Body, Configuration, ConservedSet, Trajectory,
                       acceleration, conserved, conserved_series,
                       cotangent_potential, integrate, newtonian_potential,
                       so3_invariance_residual)
from .elliptic import JacobiTriple, complete_K, jacobi
from .errors import (BoundaryCase, ConfigInvalid, DegenerateFit,
                     DegenerateInertia, ModulusOutOfRange, NoRootInRange,
                     NotAntiSymmetric, NotAsymmetric, NotSymmetric,
                     S2BodyError, SingularPair, ZeroInertiaAxis)
from .geom3 import (EulerAngles, body_angular_velocity, euler_kinematics,
                    euler_to_rotation, hat, rodrigues, rotation_to_euler,
                    symmetric_eigen3, vee)
from .kernels import BACKEND
from .rigidbody import (EulerFlowState, MotionClass, OmegaPath,
                        PrincipalFrame, RotationPath, classification_report,
                        classify, closed_form_omega, closed_form_tau_offset,
                        degenerate_axis_solution, euler_rhs, first_integrals,
                        inertia_tensor, integrals_of, integrate_euler,
                        modulus_k2, principal_frame, rebuild_trajectory,
                        reconstruct_rotation, tau_rate)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Body", "BoundaryCase", "CoefficientVectors", "ConfigInvalid",
    "Configuration", "ConservedSet", "DegenerateFit", "DegenerateInertia",
    "EulerAngles", "EulerFlowState", "JacobiTriple", "ModulusOutOfRange",
    "MotionClass", "NoRootInRange", "NotAntiSymmetric", "NotAsymmetric",
    "NotSymmetric", "OmegaPath", "PrincipalFrame", "RelativeEquilibriumFit",
    "RigidityReport", "RotationPath", "S2BodyError", "SeriesCoefficients",
    "SingularPair", "TorqueResidual", "Trajectory", "ZeroInertiaAxis",
    "acceleration", "body_angular_velocity", "classification_report",
    "classify", "closed_form_omega", "closed_form_tau_offset",
    "coefficient_vectors", "complete_K", "conserved", "conserved_series",
    "cotangent_potential", "degenerate_axis_solution", "euler_kinematics",
    "euler_rhs", "euler_to_rotation", "find_relative_equilibrium",
    "first_integrals", "fit_constant_omega", "hat", "inertia_tensor",
    "integrals_of", "integrate", "integrate_euler", "jacobi", "modulus_k2",
    "monomial_gram_rank", "newtonian_potential", "per_body_torque_residual",
    "principal_frame", "rebuild_trajectory", "reconstruct_rotation",
    "rigidity_check", "rodrigues", "rotation_to_euler",
    "separatrix_system", "series_coefficient_matrix", "series_coefficients",
    "so3_invariance_residual", "symmetric_eigen3", "tau_rate", "vee",
    "verify_theorem",
]
