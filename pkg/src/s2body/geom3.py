"""3D vector/rotation algebra: the hat map, Rodrigues' formula, z-x-z Euler
angles, and a small cyclic-Jacobi eigensolver for symmetric 3x3 matrices.

Conventions: rotations are 3x3 numpy arrays acting on column vectors,
R^T R = E, det R = +1. Euler angles (phi, theta, psi) compose as
R = Rz(phi) @ Rx(theta) @ Rz(psi) with theta in [0, pi].
"""
import math
from typing import NamedTuple

import numpy as np

from .errors import NotAntiSymmetric, NotSymmetric

# default tolerances; every checker takes an override
VEE_TOL = 1e-10
BODY_OMEGA_TOL = 1e-8
SYMMETRY_TOL = 1e-10
JACOBI_OFFDIAG_TOL = 1e-14
EIGEN_CLUSTER_TOL = 1e-9


class EulerAngles(NamedTuple):
    phi: float
    theta: float
    psi: float


def hat(v):
    """Anti-symmetric matrix A with A @ u = v x u."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y],
                     [z, 0.0, -x],
                     [-y, x, 0.0]])


def vee(A, tol=VEE_TOL):
    """Inverse of hat. Raises NotAntiSymmetric if A + A^T is too large."""
    A = np.asarray(A, dtype=float)
    defect = np.max(np.abs(A + A.T))
    if defect > tol:
        raise NotAntiSymmetric(f"anti-symmetry defect {defect:.3e} > {tol:.3e}")
    return np.array([A[2, 1], A[0, 2], A[1, 0]])


def rodrigues(axis_times_angle):
    """exp(hat(v)). Series expansion of the sin/versine factors below
    theta = 1e-4 to avoid cancellation; identity at v = 0."""
    v = np.asarray(axis_times_angle, dtype=float)
    theta = math.sqrt(v @ v)
    K = hat(v)
    if theta < 1e-4:
        t2 = theta * theta
        s = 1.0 - t2 / 6.0 + t2 * t2 / 120.0          # sin(t)/t
        c2 = 0.5 - t2 / 24.0 + t2 * t2 / 720.0        # (1-cos(t))/t^2
    else:
        s = math.sin(theta) / theta
        c2 = (1.0 - math.cos(theta)) / (theta * theta)
    return np.eye(3) + s * K + c2 * (K @ K)


def _rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def euler_to_rotation(angles):
    """Compose Rz(phi) @ Rx(theta) @ Rz(psi)."""
    phi, theta, psi = angles
    return _rot_z(phi) @ _rot_x(theta) @ _rot_z(psi)


def rotation_to_euler(R, gimbal_tol=1e-12):
    """Invert euler_to_rotation. At sin(theta) ~ 0 the split between phi and
    psi is not observable; convention: psi = 0, spin folded into phi."""
    R = np.asarray(R, dtype=float)
    sin_theta = math.hypot(R[2, 0], R[2, 1])
    theta = math.atan2(sin_theta, R[2, 2])
    if sin_theta < gimbal_tol:
        phi = math.atan2(R[1, 0], R[0, 0])
        psi = 0.0
    else:
        phi = math.atan2(R[0, 2], -R[1, 2])
        psi = math.atan2(R[2, 0], R[2, 1])
    if phi <= -math.pi:
        phi += 2.0 * math.pi
    if psi <= -math.pi:
        psi += 2.0 * math.pi
    return EulerAngles(phi, theta, psi)


def body_angular_velocity(R, Rdot, tol=BODY_OMEGA_TOL):
    """Omega = vee(R^T Rdot); the spatial vector is omega = R @ Omega."""
    R = np.asarray(R, dtype=float)
    return vee(R.T @ np.asarray(Rdot, dtype=float), tol=tol)


def euler_kinematics(angles, rates):
    """Body angular velocity from Euler angles and their rates."""
    _, theta, psi = angles
    phidot, thetadot, psidot = rates
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(psi), math.cos(psi)
    return np.array([phidot * st * sp + thetadot * cp,
                     phidot * st * cp - thetadot * sp,
                     phidot * ct + psidot])


def _orthonormal_basis_of_span(cols):
    """Deterministic orthonormal basis of span(cols): project the coordinate
    axes onto the subspace, keep the largest projections, Gram-Schmidt."""
    P = cols @ cols.T  # projector, cols orthonormal
    proj = [P @ e for e in np.eye(3)]
    order = np.argsort([-(p @ p) for p in proj])
    basis = []
    for idx in order:
        w = proj[idx].copy()
        for b in basis:
            w -= (w @ b) * b
        n = math.sqrt(w @ w)
        if n > 1e-8:
            basis.append(w / n)
        if len(basis) == cols.shape[1]:
            break
    return np.column_stack(basis)


def symmetric_eigen3(M, tol=SYMMETRY_TOL, offdiag_tol=JACOBI_OFFDIAG_TOL,
                     cluster_tol=EIGEN_CLUSTER_TOL):
    """Eigendecomposition of a symmetric 3x3 matrix by cyclic Jacobi
    rotations. Returns (evals ascending, frame) with frame^T M frame diagonal
    and det(frame) = +1.

    Output is deterministic even with repeated eigenvalues: degenerate
    clusters get a basis built from coordinate-axis projections, each column
    has its largest component positive, and handedness is fixed last by
    negating the third column if needed.
    """
    M = np.asarray(M, dtype=float)
    defect = np.max(np.abs(M - M.T))
    if defect > tol:
        raise NotSymmetric(f"symmetry defect {defect:.3e} > {tol:.3e}")
    A = 0.5 * (M + M.T)
    V = np.eye(3)
    scale = max(np.max(np.abs(A)), 1e-300)
    for _ in range(60):
        off = math.sqrt(A[0, 1] ** 2 + A[0, 2] ** 2 + A[1, 2] ** 2)
        if off <= offdiag_tol * scale:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = A[p, q]
            if apq == 0.0:
                continue
            # classic stable Jacobi angle
            beta = (A[q, q] - A[p, p]) / (2.0 * apq)
            t = math.copysign(1.0, beta) / (abs(beta) + math.hypot(beta, 1.0))
            c = 1.0 / math.sqrt(1.0 + t * t)
            s = t * c
            J = np.eye(3)
            J[p, p] = J[q, q] = c
            J[p, q] = s
            J[q, p] = -s
            A = J.T @ A @ J
            V = V @ J

    evals = np.diag(A).copy()
    order = np.argsort(evals, kind="stable")
    evals = evals[order]
    V = V[:, order]

    # deterministic eigenvectors inside degenerate clusters
    gap = cluster_tol * max(np.max(np.abs(evals)), 1e-300)
    i = 0
    while i < 3:
        j = i + 1
        while j < 3 and abs(evals[j] - evals[j - 1]) <= gap:
            j += 1
        if j - i > 1:
            V[:, i:j] = _orthonormal_basis_of_span(V[:, i:j])
        i = j

    for k in range(3):
        lead = np.argmax(np.abs(V[:, k]))
        if V[lead, k] < 0.0:
            V[:, k] = -V[:, k]
    if np.linalg.det(V) < 0.0:
        V[:, 2] = -V[:, 2]
    return evals, V
