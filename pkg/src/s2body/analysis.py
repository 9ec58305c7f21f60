"""Theorem-verification layer: rigidity and relative-equilibrium detectors,
the per-body coefficient vectors of the reduced rotating-frame system, rank
tests for the monomials of the Euler flow, the series coefficients behind
the linear-independence argument, and a 1-D relative-equilibrium finder.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._kernels_py import cot_value_grad, newt_value_grad
from .dynamics import Configuration, Trajectory
from .errors import DegenerateFit, DegenerateInertia, NoRootInRange, SingularPair
from .geom3 import hat, rodrigues
from .kernels import COT_GUARD, NEWT_GUARD
from .rigidbody import (EulerFlowState, OmegaPath, PrincipalFrame,
                        classification_report, euler_rhs, inertia_tensor,
                        integrate_euler, principal_frame)

RIGIDITY_TOL = 1e-8
RANK_REL_THRESHOLD = 1e-8


@dataclass
class RigidityReport:
    max_distance_drift: float
    is_rigid: bool
    tol: float = RIGIDITY_TOL


@dataclass
class RelativeEquilibriumFit:
    omega: np.ndarray   # spatial, constant
    residual: float     # max over time and bodies of |q_i(t) - exp(w t) q_i(0)|


@dataclass
class CoefficientVectors:
    c_xy: np.ndarray            # (N, 3)
    c_yz: np.ndarray
    c_zx: np.ndarray
    c_yy: np.ndarray
    c0: Optional[np.ndarray]    # constant right side; needs twoK and C2


@dataclass
class SeriesCoefficients:
    c0: float
    c1: float
    c2: float
    c3: float
    c4: float


@dataclass
class TorqueResidual:
    lhs: np.ndarray            # (S, N, 3) left side along the path
    rhs: np.ndarray            # (N, 3) torque side, constant in Q
    lhs_variation: np.ndarray  # (N,) max |lhs(t) - lhs(0)|
    gap: np.ndarray            # (N,) max |lhs(t) - rhs|


def rigidity_check(traj: Trajectory, tol=RIGIDITY_TOL) -> RigidityReport:
    """Max drift of the pairwise inner products q_i.q_j over the samples."""
    pos = traj.positions
    G0 = pos[0] @ pos[0].T
    drift = 0.0
    for k in range(traj.n_samples):
        G = pos[k] @ pos[k].T
        drift = max(drift, float(np.max(np.abs(G - G0))))
    return RigidityReport(drift, drift <= tol, tol)


def _rotation_log(R):
    """Axis-angle vector of a rotation matrix (angle < pi expected)."""
    w = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    sa = np.linalg.norm(w)
    ca = 0.5 * (np.trace(R) - 1.0)
    angle = math.atan2(sa, ca)
    if sa > 1e-12:
        return w * (angle / sa)
    return w


def fit_constant_omega(traj: Trajectory) -> RelativeEquilibriumFit:
    """Estimate one spatial angular velocity for the whole trajectory.

    Per step: best-fit rotation between consecutive position sets (SVD
    orthogonal Procrustes), log-mapped and divided by dt; the estimates are
    averaged. The residual compares the trajectory against pure rotation
    exp(hat(w) t) applied to the first snapshot.
    """
    if traj.n_samples < 3:
        raise ValueError("need at least 3 samples")
    pos = traj.positions
    if traj.n_bodies == 1:
        moved = np.max(np.linalg.norm(pos[:, 0] - pos[0, 0], axis=-1))
        if moved <= 1e-12 * max(1.0, np.linalg.norm(pos[0, 0])):
            raise DegenerateFit("single static body: rotation axis undetermined")
    ws = []
    for k in range(traj.n_samples - 1):
        H = pos[k + 1].T @ pos[k]
        U, sv, Vt = np.linalg.svd(H)
        dt = traj.times[k + 1] - traj.times[k]
        if sv[1] <= 1e-12 * sv[0]:
            # collinear snapshot: spin about the line is unobservable, so use
            # the minimal rotation taking the line direction across the step
            a, b = Vt[0], U[:, 0]
            axis = np.cross(a, b)
            angle = math.atan2(np.linalg.norm(axis), float(a @ b))
            n = np.linalg.norm(axis)
            w = axis / n * angle if n > 0.0 else np.zeros(3)
            ws.append(w / dt)
            continue
        D = np.diag([1.0, 1.0, float(np.sign(np.linalg.det(U @ Vt)))])
        Rk = U @ D @ Vt
        ws.append(_rotation_log(Rk) / dt)
    omega = np.mean(ws, axis=0)
    residual = 0.0
    for k in range(traj.n_samples):
        R = rodrigues(omega * traj.times[k])
        gap = np.linalg.norm(pos[k] - pos[0] @ R.T, axis=-1)
        residual = max(residual, float(np.max(gap)))
    return RelativeEquilibriumFit(omega, residual)


def _strict_moments(principal: PrincipalFrame):
    ix, iy, iz = principal.moments
    scale = max(abs(ix), abs(iy), abs(iz), 1e-300)
    if iy - ix <= 1e-12 * scale or iz - iy <= 1e-12 * scale:
        raise DegenerateInertia(f"moments {[ix, iy, iz]} not strictly ordered")
    return ix, iy, iz


def coefficient_vectors(Q, principal: PrincipalFrame, twoK=None, C2=None) \
        -> CoefficientVectors:
    """The four per-body vectors multiplying W_x W_y, W_y W_z, W_z W_x, W_y^2
    in the reduced rotating-frame system, plus (when the two first integrals
    are supplied) the constant right-hand side c0."""
    ix, iy, iz = _strict_moments(principal)
    Q = np.asarray(Q, dtype=float)
    x, y, z = Q[:, 0], Q[:, 1], Q[:, 2]
    n = len(Q)
    c_xy = np.column_stack([
        -(ix - iy + iz) / iz * z * x,
        (-ix + iy + iz) / iz * y * z,
        (x * x - y * y) + (ix - iy) / iz * (x * x + y * y),
    ])
    c_yz = np.column_stack([
        (y * y - z * z) + (iy - iz) / ix * (y * y + z * z),
        -(ix + iy - iz) / ix * x * y,
        (ix - iy + iz) / ix * z * x,
    ])
    c_zx = np.column_stack([
        (ix + iy - iz) / iy * x * y,
        (z * z - x * x) + (iz - ix) / iy * (z * z + x * x),
        (ix - iy - iz) / iy * y * z,
    ])
    c_yy = np.column_stack([
        (-1.0 - iy * (iy - ix) / (iz * (iz - ix))) * y * z,
        (ix * ix + iz * iz - iy * (ix + iz)) * iy / ((ix - iz) * iz * ix) * z * x,
        (1.0 + iy * (iy - iz) / (ix * (ix - iz))) * x * y,
    ])
    c0 = None
    if twoK is not None and C2 is not None:
        a_x = (twoK * iz - C2) / (ix * (iz - ix))
        a_z = (C2 - twoK * ix) / (iz * (iz - ix))
        c0 = np.column_stack([y * z * a_z, x * z * (a_x - a_z), -x * y * a_x])
    assert c_xy.shape == (n, 3)
    return CoefficientVectors(c_xy, c_yz, c_zx, c_yy, c0)


def monomial_gram_rank(omega_path: OmegaPath, rel_threshold=RANK_REL_THRESHOLD):
    """Numerical rank of the sample matrix with columns
    [W_x W_y, W_y W_z, W_z W_x, W_y^2, 1]."""
    om = np.asarray(omega_path.omegas, dtype=float)
    if len(om) < 50:
        raise ValueError("need at least 50 samples")
    ox, oy, oz = om[:, 0], om[:, 1], om[:, 2]
    A = np.column_stack([ox * oy, oy * oz, oz * ox, oy * oy, np.ones(len(om))])
    # column scaling keeps the threshold meaningful across amplitude ranges
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0.0] = 1.0
    sv = np.linalg.svd(A / norms, compute_uv=False)
    rank = int(np.sum(sv > rel_threshold * sv[0]))
    return rank, sv


def series_coefficients(a, k2) -> SeriesCoefficients:
    """The five coefficients of the tau-expansion used in the
    linear-independence argument, as linear functions of (a1..a5)."""
    a1, a2, a3, a4, a5 = [float(v) for v in a]
    return SeriesCoefficients(
        c0=a3 + a5,
        c1=a1 + a2,
        c2=a4 - 0.5 * a3 * (k2 + 1.0),
        c3=-(a1 * (k2 + 4.0) + a2 * (4.0 * k2 + 1.0)) / 6.0,
        c4=(a3 * (k2 * k2 + 14.0 * k2 + 1.0) - 8.0 * a4 * (k2 + 1.0)) / 24.0,
    )


def series_coefficient_matrix(k2):
    """Matrix M of the linear map a -> (c0..c4); kernel is trivial away from
    k^2 = 1 and two-dimensional there."""
    M = np.zeros((5, 5))
    for j in range(5):
        a = np.zeros(5)
        a[j] = 1.0
        c = series_coefficients(a, k2)
        M[:, j] = [c.c0, c.c1, c.c2, c.c3, c.c4]
    return M


def _potential_grad(masses, Q, potential):
    if potential == "cotangent":
        _, g, si, sj = cot_value_grad(masses, Q, COT_GUARD)
    else:
        _, g, si, sj = newt_value_grad(masses, Q, NEWT_GUARD)
    if si >= 0:
        raise SingularPair(si, sj)
    return g


def per_body_torque_residual(omega_path: OmegaPath, principal: PrincipalFrame,
                             masses, potential="cotangent") -> TorqueResidual:
    """Evaluate, along the Omega path with the bodies frozen at the
    principal-frame positions, the left side
    (|Q_i|^2 E - Q_i Q_i^T) dW/dt + (Q_i.W) Q_i x W and, independently, the
    torque side m_i^-1 Q_i x dU/dQ_i. Reports the time-variation of the left
    side (which the rigid-motion argument requires constant) and the gap
    between the sides."""
    Q = principal.positions
    m = np.asarray(masses, dtype=float)
    om = np.asarray(omega_path.omegas, dtype=float)
    S, N = len(om), len(Q)
    P = np.einsum("ij,ij->i", Q, Q)[:, None, None] * np.eye(3)[None] \
        - np.einsum("ia,ib->iab", Q, Q)
    lhs = np.empty((S, N, 3))
    for k in range(S):
        w = om[k]
        wdot = euler_rhs(EulerFlowState(w, principal))
        lhs[k] = np.einsum("iab,b->ia", P, wdot) \
            + (Q @ w)[:, None] * np.cross(Q, np.broadcast_to(w, (N, 3)))
    g = _potential_grad(m, Q, potential)
    rhs = np.cross(Q, g) / m[:, None]
    variation = np.max(np.linalg.norm(lhs - lhs[0], axis=-1), axis=0)
    gap = np.max(np.linalg.norm(lhs - rhs[None], axis=-1), axis=0)
    return TorqueResidual(lhs, rhs, variation, gap)


def _re_residuals(c: Configuration, axis, w):
    """Per-body residual of the uniform-rotation balance at rate w about
    axis. Sphere mode: tangential part only (the radial part is absorbed by
    the multiplier); flat mode: the full vector."""
    m = c.masses
    Q = c.positions
    if c.potential == "cotangent":
        g = _potential_grad(m, Q, "cotangent")
    else:
        g = _potential_grad(m, Q, "newtonian")
    cent = np.cross(axis, np.cross(axis, Q))
    res = m[:, None] * (w * w) * cent - g
    if c.space == "sphere":
        r2 = np.einsum("ij,ij->i", Q, Q)
        res = res - (np.einsum("ij,ij->i", Q, res) / r2)[:, None] * Q
    return res, cent


def find_relative_equilibrium(template: Configuration, axis, omega_range):
    """1-D search for a uniform-rotation rate about the given axis that
    balances the template positions. Bisection on the signed residual of the
    first body with a nonzero centripetal direction; NoRootInRange when the
    balance does not change sign on the interval.

    Returns (omega_magnitude, residual) with residual the max over bodies of
    the Euclidean residual norm at the located rate."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    lo, hi = float(omega_range[0]), float(omega_range[1])

    res0, cent = _re_residuals(template, axis, lo)
    if template.space == "sphere":
        Q = template.positions
        r2 = np.einsum("ij,ij->i", Q, Q)
        cent = cent - (np.einsum("ij,ij->i", Q, cent) / r2)[:, None] * Q
    pick = None
    for i in range(template.n):
        n = np.linalg.norm(cent[i])
        if n > 1e-12:
            pick = i
            that = cent[i] / n
            break
    if pick is None:
        # every body sits on the axis: any rate is an equilibrium candidate
        w = 0.5 * (lo + hi)
        res, _ = _re_residuals(template, axis, w)
        return w, float(np.max(np.linalg.norm(res, axis=-1)))

    def balance(w):
        res, _ = _re_residuals(template, axis, w)
        return float(res[pick] @ that)

    f_lo, f_hi = balance(lo), balance(hi)
    if f_lo == 0.0:
        w = lo
    elif f_hi == 0.0:
        w = hi
    elif f_lo * f_hi > 0.0:
        raise NoRootInRange(
            f"balance has no sign change on [{lo}, {hi}] (f({lo})={f_lo:.3e}, "
            f"f({hi})={f_hi:.3e})")
    else:
        a, b, fa = lo, hi, f_lo
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = balance(mid)
            if fa * fm <= 0.0:
                b = mid
            else:
                a, fa = mid, fm
            if b - a < 1e-15 * max(1.0, abs(b)):
                break
        w = 0.5 * (a + b)
    res, _ = _re_residuals(template, axis, w)
    return w, float(np.max(np.linalg.norm(res, axis=-1)))


def separatrix_system(principal: PrincipalFrame):
    """The 2x2 linear system of the separatrix contradiction argument and
    the closed-form value of its determinant."""
    ix, iy, iz = _strict_moments(principal)
    alpha = math.sqrt((iz - iy) * (iy - ix) / (ix * iz))
    M = np.array([
        [alpha * (ix + iy - iz), (iz - ix) + iy * (iy - ix) / iz],
        [(ix - iz) + iy * (iy - iz) / ix, alpha * (ix - iy - iz)],
    ])
    det_formula = 2.0 * iy * (ix - iz) ** 2 * (ix - iy + iz) / (ix * iz)
    return M, det_formula


def verify_theorem(config: Configuration, dt=1e-3, steps=10_000,
                   rigidity_tol=RIGIDITY_TOL) -> dict:
    """End-to-end check of a configuration against the rigid-motion claim:
    integrate, test rigidity, fit a constant spatial rotation, classify the
    body-frame motion, and evaluate the obstruction diagnostics (monomial
    rank along the Euler flow, per-body coefficient entries).

    Returns a JSON-ready report."""
    from .dynamics import integrate

    traj = integrate(config, dt, steps)
    rigidity = rigidity_check(traj, rigidity_tol)
    try:
        fit = fit_constant_omega(traj)
        re_fit = {"omega": [float(v) for v in fit.omega],
                  "residual": fit.residual}
        omega_spatial = fit.omega
    except DegenerateFit:
        re_fit = {"omega": None, "residual": None}
        omega_spatial = np.zeros(3)

    m = config.masses
    q0 = config.positions
    pf = principal_frame(inertia_tensor(m, q0), q0)
    omega_body = pf.frame.T @ omega_spatial
    from .rigidbody import integrals_of
    twoK, C2 = integrals_of(pf.moments, omega_body)
    classification = classification_report(twoK, C2, pf, omega_body)

    gram_rank = None
    sv = None
    moments = pf.moments
    if np.min(moments) > 1e-9 * np.max(moments) and twoK > 0:
        state = EulerFlowState(omega_body, pf)
        horizon = 20.0
        n_samp = 2000
        path = integrate_euler(state, horizon / n_samp, n_samp)
        gram_rank, sv = monomial_gram_rank(path)

    coefficient_checks = []
    ix, iy, iz = moments
    scale = max(np.max(np.abs(moments)), 1e-300)
    if iy - ix > 1e-9 * scale and iz - iy > 1e-9 * scale:
        cv = coefficient_vectors(pf.positions, pf, twoK, C2)
        for i in range(config.n):
            x, y = pf.positions[i, 0], pf.positions[i, 1]
            coefficient_checks.append({
                "body": i,
                "xy_nonzero": bool(abs(x) > 1e-12 or abs(y) > 1e-12),
                "c_xy_third": float(cv.c_xy[i, 2]),
                "c_yy_third": float(cv.c_yy[i, 2]),
            })

    return {
        "rigidity": {"drift": rigidity.max_distance_drift,
                     "is_rigid": rigidity.is_rigid},
        "re_fit": re_fit,
        "classification": classification,
        "gram_rank": gram_rank,
        "singular_values": None if sv is None else [float(s) for s in sv],
        "coefficient_checks": coefficient_checks,
        "aborted": traj.aborted,
    }
