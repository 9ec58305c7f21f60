"""Rigid-body reduction: inertia tensor, principal frame, Euler's equations,
first integrals, motion classification, closed-form solutions, and
reconstruction of the spatial rotation.

Principal moments are labeled I_x <= I_y <= I_z, except that a zero moment
(bodies collinear through the origin) is relabeled into the I_z slot by a
cyclic axis permutation so the degenerate axis is always z.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .dynamics import Body, Configuration, Trajectory
from .elliptic import complete_K, jacobi
from .errors import (BoundaryCase, ConfigInvalid, NotAsymmetric,
                     ZeroInertiaAxis)
from .geom3 import hat, rodrigues, symmetric_eigen3

# classification tolerances (relative); overridable per call
EIGEN_EQ_TOL = 1e-9       # on moment gaps, scaled by max(I)
ZERO_MOMENT_TOL = 1e-9    # on a moment itself, scaled by max(I)
BOUNDARY_TOL = 1e-10      # on |C|^2 - 2K I_{x,z}, scaled by 2K I_z
SEPARATRIX_TOL = 1e-9     # on |k^2 - 1|

TAG_SPHERICAL = "SphericalTop"
TAG_DEGENERATE_AXIS = "DegenerateAxis"
TAG_SYMMETRIC = "SymmetricTop"
TAG_BOUNDARY_X = "AsymBoundaryX"
TAG_BOUNDARY_Z = "AsymBoundaryZ"
TAG_SEPARATRIX_FIXED = "AsymSeparatrixFixed"
TAG_SEPARATRIX = "AsymSeparatrix"
TAG_GENERIC = "AsymGeneric"


@dataclass
class PrincipalFrame:
    I_x: float
    I_y: float
    I_z: float
    frame: np.ndarray        # columns map principal coords -> body coords
    positions: np.ndarray    # (N, 3) body positions in principal coords

    @property
    def moments(self):
        return np.array([self.I_x, self.I_y, self.I_z])


@dataclass
class EulerFlowState:
    omega: np.ndarray
    principal: PrincipalFrame
    twoK: Optional[float] = None
    C2: Optional[float] = None

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        twoK, C2 = integrals_of(self.principal.moments, self.omega)
        scale = max(abs(twoK), abs(C2), 1.0)
        if self.twoK is None:
            self.twoK = twoK
        elif abs(self.twoK - twoK) > 1e-10 * scale:
            raise ConfigInvalid(f"twoK={self.twoK} inconsistent with omega (got {twoK})")
        if self.C2 is None:
            self.C2 = C2
        elif abs(self.C2 - C2) > 1e-10 * scale:
            raise ConfigInvalid(f"C2={self.C2} inconsistent with omega (got {C2})")


@dataclass
class MotionClass:
    tag: str
    k2: Optional[float] = None


@dataclass
class OmegaPath:
    times: np.ndarray    # (S,)
    omegas: np.ndarray   # (S, 3)


@dataclass
class RotationPath:
    times: np.ndarray     # (S,)
    matrices: np.ndarray  # (S, 3, 3)


def inertia_tensor(masses, positions):
    """sum_i m_i (|Q_i|^2 E - Q_i Q_i^T)."""
    m = np.asarray(masses, dtype=float)
    Q = np.asarray(positions, dtype=float)
    r2 = np.einsum("ij,ij->i", Q, Q)
    return np.sum(m * r2) * np.eye(3) - np.einsum("i,ij,ik->jk", m, Q, Q)


def principal_frame(I, positions, zero_tol=ZERO_MOMENT_TOL):
    """Diagonalize the inertia tensor and re-express positions in the
    eigenframe. Eigenvalues come out ascending, except that a zero moment is
    rotated into the I_z slot (cyclic column permutation, det stays +1)."""
    evals, V = symmetric_eigen3(np.asarray(I, dtype=float))
    scale = max(np.max(np.abs(evals)), 1e-300)
    if evals[0] <= zero_tol * scale:
        order = [1, 2, 0]
        evals = evals[order]
        V = V[:, order]
    Q = np.asarray(positions, dtype=float) @ V  # rows: Q_i^T V = (V^T Q_i)^T
    return PrincipalFrame(float(evals[0]), float(evals[1]), float(evals[2]), V, Q)


def integrals_of(moments, omega):
    """2K = sum I_a W_a^2 and |C|^2 = sum I_a^2 W_a^2."""
    I = np.asarray(moments, dtype=float)
    w2 = np.asarray(omega, dtype=float) ** 2
    return float(np.sum(I * w2)), float(np.sum(I * I * w2))


def first_integrals(state: EulerFlowState):
    return integrals_of(state.principal.moments, state.omega)


def _require_positive_moments(moments):
    I = np.asarray(moments, dtype=float)
    if np.min(I) <= ZERO_MOMENT_TOL * max(np.max(I), 1e-300):
        raise ZeroInertiaAxis(f"principal moments {I.tolist()} include a zero axis")
    return I


def euler_rhs(state: EulerFlowState):
    """(I_y-I_z)/I_x W_y W_z and cyclic."""
    ix, iy, iz = _require_positive_moments(state.principal.moments)
    ox, oy, oz = state.omega
    return np.array([(iy - iz) / ix * oy * oz,
                     (iz - ix) / iy * oz * ox,
                     (ix - iy) / iz * ox * oy])


def integrate_euler(state: EulerFlowState, dt, steps) -> OmegaPath:
    """RK4 flow of Euler's equations."""
    I = _require_positive_moments(state.principal.moments)
    if not dt > 0 or not steps >= 1:
        raise ValueError("need dt > 0 and steps >= 1")
    omegas = kernels.euler_rk4(I, state.omega, float(dt), int(steps))
    return OmegaPath(np.arange(steps + 1) * dt, omegas)


def _band_checks(twoK, C2, moments, eq_tol, boundary_tol):
    ix, iy, iz = moments
    scale = max(np.max(np.abs(moments)), 1e-300)
    if iy - ix <= eq_tol * scale or iz - iy <= eq_tol * scale:
        raise NotAsymmetric(f"moments {list(moments)} are not strictly ordered")
    band = max(abs(twoK * iz), 1e-300)
    lo = C2 - twoK * ix
    hi = twoK * iz - C2
    if abs(lo) <= boundary_tol * band:
        raise BoundaryCase("|C|^2 = 2K I_x (rotation about the x axis)")
    if abs(hi) <= boundary_tol * band:
        raise BoundaryCase("|C|^2 = 2K I_z (rotation about the z axis)")
    if lo < 0 or hi < 0:
        raise BoundaryCase(f"|C|^2={C2} outside the band [2K I_x, 2K I_z]")


def modulus_k2(twoK, C2, principal: PrincipalFrame,
               eq_tol=EIGEN_EQ_TOL, boundary_tol=BOUNDARY_TOL):
    """k^2 = (I_y-I_x)(2K I_z-|C|^2) / ((I_z-I_y)(|C|^2-2K I_x)); needs a
    strictly asymmetric top and |C|^2 interior to the admissible band."""
    I = principal.moments
    _band_checks(twoK, C2, I, eq_tol, boundary_tol)
    ix, iy, iz = I
    return (iy - ix) * (twoK * iz - C2) / ((iz - iy) * (C2 - twoK * ix))


def classify(twoK, C2, principal: PrincipalFrame, omega,
             eq_tol=EIGEN_EQ_TOL, zero_tol=ZERO_MOMENT_TOL,
             boundary_tol=BOUNDARY_TOL, sep_tol=SEPARATRIX_TOL) -> MotionClass:
    """Assign exactly one motion tag. Order of tests: zero moment (first,
    because the relabeled frame puts it in the I_z slot and breaks the
    ascending order the later gap tests assume), spherical top, symmetric
    top, band boundaries, separatrix (fixed point or not), generic (k^2
    attached, kept as a label even when > 1)."""
    I = principal.moments
    scale = max(np.max(np.abs(I)), 1e-300)
    ix, iy, iz = I
    if np.min(I) <= zero_tol * scale:
        return MotionClass(TAG_DEGENERATE_AXIS)
    if iz - ix <= eq_tol * scale:
        return MotionClass(TAG_SPHERICAL)
    if iy - ix <= eq_tol * scale or iz - iy <= eq_tol * scale:
        return MotionClass(TAG_SYMMETRIC)
    band = max(abs(twoK * iz), 1e-300)
    if abs(C2 - twoK * ix) <= boundary_tol * band:
        return MotionClass(TAG_BOUNDARY_X)
    if abs(twoK * iz - C2) <= boundary_tol * band:
        return MotionClass(TAG_BOUNDARY_Z)
    k2 = modulus_k2(twoK, C2, principal, eq_tol, boundary_tol)
    if abs(k2 - 1.0) < sep_tol:
        oy = float(np.asarray(omega, dtype=float)[1])
        if abs(twoK - iy * oy * oy) <= 1e-10 * max(abs(twoK), 1e-300):
            return MotionClass(TAG_SEPARATRIX_FIXED, k2)
        return MotionClass(TAG_SEPARATRIX, k2)
    return MotionClass(TAG_GENERIC, k2)


def tau_rate(twoK, C2, principal: PrincipalFrame):
    """d tau / dt for the closed forms. For k^2 <= 1 this is
    sqrt((I_z-I_y)(|C|^2-2K I_x)/(I_x I_y I_z)); for k^2 > 1 the axis-swapped
    expression sqrt((I_y-I_x)(2K I_z-|C|^2)/(I_x I_y I_z))."""
    ix, iy, iz = principal.moments
    k2 = modulus_k2(twoK, C2, principal)
    A = twoK * iz - C2
    B = C2 - twoK * ix
    if k2 > 1.0:
        return math.sqrt((iy - ix) * A / (ix * iy * iz))
    return math.sqrt((iz - iy) * B / (ix * iy * iz))


def closed_form_omega(tau, twoK, C2, principal: PrincipalFrame,
                      branch_signs=(1, 1)):
    """Omega(tau) in closed form, anchored at Omega_y = 0 for tau = 0.

    branch_signs = (sx, sz) picks among the four symmetric solution branches:
    Omega = (sx*X, sx*sz*Y, sz*Z) where (X, Y, Z) is the positive-amplitude
    form. Regimes: elliptic for k^2 < 1, hyperbolic on the separatrix, and
    for k^2 > 1 the x/z axis roles swap so the elliptic modulus becomes
    1/k^2.
    """
    ix, iy, iz = principal.moments
    k2 = modulus_k2(twoK, C2, principal)
    sx, sz = branch_signs
    A = twoK * iz - C2
    B = C2 - twoK * ix
    if abs(k2 - 1.0) < SEPARATRIX_TOL:
        sech = 1.0 / math.cosh(tau)
        X = math.sqrt(twoK * (iz - iy) / (ix * (iz - ix))) * sech
        Y = math.sqrt(twoK / iy) * math.tanh(tau)
        Z = math.sqrt(twoK * (iy - ix) / (iz * (iz - ix))) * sech
    elif k2 < 1.0:
        sn, cn, dn = jacobi(tau, k2)
        X = cn * math.sqrt(A / (ix * (iz - ix)))
        Y = sn * math.sqrt(A / (iy * (iz - iy)))
        Z = dn * math.sqrt(B / (iz * (iz - ix)))
    else:
        sn, cn, dn = jacobi(tau, 1.0 / k2)
        X = dn * math.sqrt(A / (ix * (iz - ix)))
        Y = sn * math.sqrt(B / (iy * (iy - ix)))
        Z = cn * math.sqrt(B / (iz * (iz - ix)))
    return np.array([sx * X, sx * sz * Y, sz * Z])


def closed_form_tau_offset(state: EulerFlowState):
    """Find (tau0, branch_signs) with closed_form_omega(tau0, ...) equal to
    state.omega: bisection on the Omega_y component inside each bracket of a
    coarse scan, then the best (tau0, signs) by full-vector distance."""
    twoK, C2 = state.twoK, state.C2
    pf = state.principal
    k2 = modulus_k2(twoK, C2, pf)
    target = np.asarray(state.omega, dtype=float)

    if abs(k2 - 1.0) < SEPARATRIX_TOL:
        span = 25.0  # tanh saturates; beyond this offsets are indistinguishable
    else:
        span = 2.0 * complete_K(min(k2, 1.0 / k2))

    best = None
    for sx in (1, -1):
        for sz in (1, -1):
            def gap(t):
                return closed_form_omega(t, twoK, C2, pf, (sx, sz))[1] - target[1]
            grid = np.linspace(-span, span, 201)
            vals = [gap(t) for t in grid]
            cands = []
            for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
                if fa == 0.0:
                    cands.append(a)
                elif fa * fb < 0.0:
                    lo, hi, flo = a, b, fa
                    for _ in range(100):
                        mid = 0.5 * (lo + hi)
                        fm = gap(mid)
                        if flo * fm <= 0.0:
                            hi = mid
                        else:
                            lo, flo = mid, fm
                    cands.append(0.5 * (lo + hi))
            # local minima of |gap| catch double roots (turning points) and
            # the saturated tanh of a separatrix fixed point
            absv = [abs(v) for v in vals]
            for i in range(len(grid)):
                left_ok = i == 0 or absv[i] <= absv[i - 1]
                right_ok = i == len(grid) - 1 or absv[i] <= absv[i + 1]
                if not (left_ok and right_ok):
                    continue
                lo = grid[max(i - 1, 0)]
                hi = grid[min(i + 1, len(grid) - 1)]
                for _ in range(120):
                    m1 = lo + (hi - lo) / 3.0
                    m2 = hi - (hi - lo) / 3.0
                    if abs(gap(m1)) <= abs(gap(m2)):
                        hi = m2
                    else:
                        lo = m1
                cands.append(0.5 * (lo + hi))
            for cand in cands:
                om = closed_form_omega(cand, twoK, C2, pf, (sx, sz))
                d = float(np.max(np.abs(om - target)))
                if best is None or d < best[0]:
                    best = (d, cand, (sx, sz))
    if best is None:
        raise BoundaryCase("no tau offset matches the initial omega")
    return best[1], best[2]


def reconstruct_rotation(omega_path: OmegaPath, R0=None) -> RotationPath:
    """Solve Rdot = R hat(Omega(t)) by RK4 on the uniform sample grid, with
    cubic interpolation of Omega at half-steps and a first-order
    orthonormalization after each step."""
    times = np.asarray(omega_path.times, dtype=float)
    oms = np.asarray(omega_path.omegas, dtype=float)
    T = len(times)
    R = np.eye(3) if R0 is None else np.array(R0, dtype=float)
    out = np.empty((T, 3, 3))
    out[0] = R
    if T == 1:
        return RotationPath(times, out)
    h = times[1] - times[0]
    for n in range(T - 1):
        if T < 4:
            wm = 0.5 * (oms[n] + oms[n + 1])
        elif n == 0:
            wm = (5.0 * oms[0] + 15.0 * oms[1] - 5.0 * oms[2] + oms[3]) / 16.0
        elif n == T - 2:
            wm = (oms[T - 4] - 5.0 * oms[T - 3] + 15.0 * oms[T - 2]
                  + 5.0 * oms[T - 1]) / 16.0
        else:
            wm = (-oms[n - 1] + 9.0 * oms[n] + 9.0 * oms[n + 1] - oms[n + 2]) / 16.0
        k1 = R @ hat(oms[n])
        k2 = (R + 0.5 * h * k1) @ hat(wm)
        k3 = (R + 0.5 * h * k2) @ hat(wm)
        k4 = (R + h * k3) @ hat(oms[n + 1])
        R = R + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        R = R @ (1.5 * np.eye(3) - 0.5 * (R.T @ R))
        out[n + 1] = R
    return RotationPath(times, out)


def rebuild_trajectory(rotation_path: RotationPath, omega_path: OmegaPath,
                       bodies) -> Trajectory:
    """q_i(t) = R(t) Q_i with velocities R(t)(Omega(t) x Q_i). Bodies carry
    the masses and principal-frame positions Q_i; their velocity fields are
    ignored (the path determines them)."""
    Rs = rotation_path.matrices
    oms = np.asarray(omega_path.omegas, dtype=float)
    masses = np.array([b.mass for b in bodies])
    Q = np.array([b.position for b in bodies])
    pos = np.einsum("tab,nb->tna", Rs, Q)
    vel = np.einsum("tab,tnb->tna", Rs, np.cross(oms[:, None, :], Q[None, :, :]))
    template = Configuration(
        [Body(m, p, v) for m, p, v in zip(masses, pos[0], vel[0])],
        space="sphere", potential="newtonian")
    return Trajectory(np.asarray(rotation_path.times, dtype=float),
                      pos, vel, template)


def degenerate_axis_solution(c: Configuration, dt, steps):
    """Spatial motion of a configuration whose bodies are collinear through
    the origin (zero principal moment): uniform rotation about the angular
    momentum direction at rate |c|/I_x, emitted directly as a trajectory.

    Returns (omega_spatial, Trajectory)."""
    m = c.masses
    q0 = c.positions
    v0 = c.velocities
    I = inertia_tensor(m, q0)
    pf = principal_frame(I, q0)
    if pf.I_z > ZERO_MOMENT_TOL * max(pf.I_x, pf.I_y, 1e-300):
        raise ConfigInvalid("configuration has no zero-inertia axis")
    cvec = np.sum(m[:, None] * np.cross(q0, v0), axis=0)
    omega = cvec / pf.I_x  # transverse moments are equal; rate |c|/I_x
    times = np.arange(steps + 1) * dt
    pos = np.empty((steps + 1, c.n, 3))
    vel = np.empty((steps + 1, c.n, 3))
    for k, t in enumerate(times):
        R = rodrigues(omega * t)
        pos[k] = q0 @ R.T
        vel[k] = np.cross(np.broadcast_to(omega, (c.n, 3)), pos[k])
    return omega, Trajectory(times, pos, vel, c)


def classification_report(twoK, C2, principal: PrincipalFrame, omega):
    """JSON-ready dict: tag, moments, integrals, and k^2 when defined."""
    mc = classify(twoK, C2, principal, omega)
    k2 = mc.k2
    if k2 is None and mc.tag in (TAG_GENERIC, TAG_SEPARATRIX, TAG_SEPARATRIX_FIXED):
        k2 = modulus_k2(twoK, C2, principal)
    return {
        "tag": mc.tag,
        "I": [principal.I_x, principal.I_y, principal.I_z],
        "twoK": twoK,
        "C2": C2,
        "k2": k2,
    }
