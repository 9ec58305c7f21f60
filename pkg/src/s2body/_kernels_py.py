"""Pure-numpy integration kernels.

Mirrors of the compiled kernels in _kernels_c; s2body.kernels picks one at
import time. Both produce the same RK4 arithmetic, so results agree to
rounding (tolerance-level, not bit-identical).

Potential ids: 0 = cotangent (sphere, unit radii), 1 = newtonian.
Pair sums follow the ordered-pair convention (each unordered pair twice).
"""
import numpy as np

COT_GUARD = 1e-12   # on 1 - (q_i . q_j)^2
NEWT_GUARD = 1e-9   # on |q_i - q_j|


def cot_value_grad(m, q, guard=COT_GUARD):
    """Cotangent potential value and per-body gradient.

    Returns (value, grad, sing_i, sing_j); sing_i = -1 when no pair is
    within the singular guard, otherwise value/grad are zeros.
    """
    n = m.shape[0]
    zeros = np.zeros((n, 3))
    if n == 1:
        return 0.0, zeros, -1, -1
    A = q @ q.T
    S = 1.0 - A * A
    iu, ju = np.triu_indices(n, 1)
    bad = S[iu, ju] < guard
    if np.any(bad):
        k = int(np.argmax(bad))
        return 0.0, zeros, int(iu[k]), int(ju[k])
    np.fill_diagonal(S, 1.0)
    M2 = 2.0 * np.outer(m, m)
    W = M2 * S ** -1.5
    np.fill_diagonal(W, 0.0)
    grad = W @ q
    T = M2 * 0.5 * A / np.sqrt(S)
    np.fill_diagonal(T, 0.0)
    return float(np.sum(T)), grad, -1, -1


def newt_value_grad(m, q, guard=NEWT_GUARD):
    """Newtonian potential value and per-body gradient; same return shape."""
    n = m.shape[0]
    zeros = np.zeros((n, 3))
    if n == 1:
        return 0.0, zeros, -1, -1
    D = q[:, None, :] - q[None, :, :]
    R = np.sqrt(np.sum(D * D, axis=-1))
    iu, ju = np.triu_indices(n, 1)
    bad = R[iu, ju] < guard
    if np.any(bad):
        k = int(np.argmax(bad))
        return 0.0, zeros, int(iu[k]), int(ju[k])
    np.fill_diagonal(R, 1.0)
    M2 = 2.0 * np.outer(m, m)
    W = M2 / R ** 3
    np.fill_diagonal(W, 0.0)
    grad = -np.sum(W[:, :, None] * D, axis=1)
    T = M2 * 0.5 / R
    np.fill_diagonal(T, 0.0)
    return float(np.sum(T)), grad, -1, -1


def _accel(m, q, v, radii, sphere, potential, guard):
    if potential == 0:
        _, g, si, sj = cot_value_grad(m, q, guard)
    else:
        _, g, si, sj = newt_value_grad(m, q, guard)
    if si >= 0:
        return None, si, sj
    if not sphere:
        return g / m[:, None], -1, -1
    lam = -(m * np.einsum("ij,ij->i", v, v) + np.einsum("ij,ij->i", q, g)) \
        / (2.0 * radii ** 2)
    return (2.0 * lam[:, None] * q + g) / m[:, None], -1, -1


def nbody_rk4(m, q0, v0, radii, dt, steps, sphere, potential, guard):
    """Fixed-step RK4 on the (constrained) N-body field.

    Sphere mode renormalizes positions to radius r_i and projects velocities
    tangent after every step. Returns (pos, vel, done, sing_i, sing_j) where
    pos/vel have done+1 snapshots; done < steps iff a singular pair stopped
    the run, in which case (sing_i, sing_j) name the pair.
    """
    m = np.asarray(m, dtype=float)
    q = np.array(q0, dtype=float)
    v = np.array(v0, dtype=float)
    radii = np.asarray(radii, dtype=float)
    n = m.shape[0]
    pos = np.empty((steps + 1, n, 3))
    vel = np.empty((steps + 1, n, 3))
    pos[0] = q
    vel[0] = v
    h = dt
    for s in range(1, steps + 1):
        k1v, si, sj = _accel(m, q, v, radii, sphere, potential, guard)
        if si >= 0:
            return pos[:s], vel[:s], s - 1, si, sj
        k1q = v
        q2 = q + 0.5 * h * k1q
        k2q = v + 0.5 * h * k1v
        k2v, si, sj = _accel(m, q2, k2q, radii, sphere, potential, guard)
        if si >= 0:
            return pos[:s], vel[:s], s - 1, si, sj
        q3 = q + 0.5 * h * k2q
        k3q = v + 0.5 * h * k2v
        k3v, si, sj = _accel(m, q3, k3q, radii, sphere, potential, guard)
        if si >= 0:
            return pos[:s], vel[:s], s - 1, si, sj
        q4 = q + h * k3q
        k4q = v + h * k3v
        k4v, si, sj = _accel(m, q4, k4q, radii, sphere, potential, guard)
        if si >= 0:
            return pos[:s], vel[:s], s - 1, si, sj
        q = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if sphere:
            nrm = np.sqrt(np.einsum("ij,ij->i", q, q))
            q *= (radii / nrm)[:, None]
            v -= (np.einsum("ij,ij->i", q, v) / radii ** 2)[:, None] * q
        pos[s] = q
        vel[s] = v
    return pos, vel, steps, -1, -1


def euler_rk4(inertia, omega0, dt, steps):
    """Fixed-step RK4 on Euler's rigid-body equations, (steps+1, 3) output."""
    ix, iy, iz = float(inertia[0]), float(inertia[1]), float(inertia[2])
    cx = (iy - iz) / ix
    cy = (iz - ix) / iy
    cz = (ix - iy) / iz
    out = np.empty((steps + 1, 3))
    ox, oy, oz = float(omega0[0]), float(omega0[1]), float(omega0[2])
    out[0] = ox, oy, oz
    h = dt
    for s in range(1, steps + 1):
        ax1 = cx * oy * oz
        ay1 = cy * oz * ox
        az1 = cz * ox * oy
        bx = ox + 0.5 * h * ax1
        by = oy + 0.5 * h * ay1
        bz = oz + 0.5 * h * az1
        ax2 = cx * by * bz
        ay2 = cy * bz * bx
        az2 = cz * bx * by
        ex = ox + 0.5 * h * ax2
        ey = oy + 0.5 * h * ay2
        ez = oz + 0.5 * h * az2
        ax3 = cx * ey * ez
        ay3 = cy * ez * ex
        az3 = cz * ex * ey
        fx = ox + h * ax3
        fy = oy + h * ay3
        fz = oz + h * az3
        ax4 = cx * fy * fz
        ay4 = cy * fz * fx
        az4 = cz * fx * fy
        ox += (h / 6.0) * (ax1 + 2.0 * ax2 + 2.0 * ax3 + ax4)
        oy += (h / 6.0) * (ay1 + 2.0 * ay2 + 2.0 * ay3 + ay4)
        oz += (h / 6.0) * (az1 + 2.0 * az2 + 2.0 * az3 + az4)
        out[s] = ox, oy, oz
    return out
