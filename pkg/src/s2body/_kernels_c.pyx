# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Typed integration kernels; drop-in twins of _kernels_py (same signatures,
same RK4 algebra, pair loops instead of vectorized numpy)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef int _accel(double[::1] m, double[:, ::1] q, double[:, ::1] v,
                double[::1] radii, bint sphere, int potential, double guard,
                double[:, ::1] g, double[:, ::1] acc,
                Py_ssize_t* si, Py_ssize_t* sj) nogil:
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double a, s, w, r2, r, lam, vv, qg
    for i in range(n):
        g[i, 0] = 0.0
        g[i, 1] = 0.0
        g[i, 2] = 0.0
    if potential == 0:
        for i in range(n):
            for j in range(i + 1, n):
                a = q[i, 0] * q[j, 0] + q[i, 1] * q[j, 1] + q[i, 2] * q[j, 2]
                s = 1.0 - a * a
                if s < guard:
                    si[0] = i
                    sj[0] = j
                    return 1
                w = 2.0 * m[i] * m[j] / (s * sqrt(s))
                for k in range(3):
                    g[i, k] += w * q[j, k]
                    g[j, k] += w * q[i, k]
    else:
        for i in range(n):
            for j in range(i + 1, n):
                r2 = 0.0
                for k in range(3):
                    a = q[i, k] - q[j, k]
                    r2 += a * a
                r = sqrt(r2)
                if r < guard:
                    si[0] = i
                    sj[0] = j
                    return 1
                w = 2.0 * m[i] * m[j] / (r2 * r)
                for k in range(3):
                    g[i, k] += w * (q[j, k] - q[i, k])
                    g[j, k] += w * (q[i, k] - q[j, k])
    if sphere:
        for i in range(n):
            vv = v[i, 0] * v[i, 0] + v[i, 1] * v[i, 1] + v[i, 2] * v[i, 2]
            qg = q[i, 0] * g[i, 0] + q[i, 1] * g[i, 1] + q[i, 2] * g[i, 2]
            lam = -(m[i] * vv + qg) / (2.0 * radii[i] * radii[i])
            for k in range(3):
                acc[i, k] = (2.0 * lam * q[i, k] + g[i, k]) / m[i]
    else:
        for i in range(n):
            for k in range(3):
                acc[i, k] = g[i, k] / m[i]
    return 0


def nbody_rk4(m, q0, v0, radii, double dt, Py_ssize_t steps,
              bint sphere, int potential, double guard):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] m_ = np.ascontiguousarray(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r_ = np.ascontiguousarray(radii, dtype=np.float64)
    cdef Py_ssize_t n = m_.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] pos = np.empty((steps + 1, n, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] vel = np.empty((steps + 1, n, 3))
    q_arr = np.array(q0, dtype=np.float64)
    v_arr = np.array(v0, dtype=np.float64)
    cdef double[:, ::1] q = np.ascontiguousarray(q_arr)
    cdef double[:, ::1] v = np.ascontiguousarray(v_arr)
    cdef double[::1] mm = m_
    cdef double[::1] rr = r_
    work = np.zeros((9, n, 3))
    cdef double[:, ::1] g = work[0]
    cdef double[:, ::1] k1v = work[1]
    cdef double[:, ::1] k2v = work[2]
    cdef double[:, ::1] k3v = work[3]
    cdef double[:, ::1] k4v = work[4]
    cdef double[:, ::1] k2q = work[5]
    cdef double[:, ::1] k3q = work[6]
    cdef double[:, ::1] k4q = work[7]
    cdef double[:, ::1] qt = work[8]
    cdef double[:, ::1] pview
    cdef double[:, ::1] vview
    cdef Py_ssize_t s, i, k, si = -1, sj = -1
    cdef double h = dt, nrm, dotqv

    pview = pos[0]
    vview = vel[0]
    for i in range(n):
        for k in range(3):
            pview[i, k] = q[i, k]
            vview[i, k] = v[i, k]

    for s in range(1, steps + 1):
        with nogil:
            # stage 1: k1q = v
            if _accel(mm, q, v, rr, sphere, potential, guard, g, k1v, &si, &sj):
                break
            # stage 2
            for i in range(n):
                for k in range(3):
                    qt[i, k] = q[i, k] + 0.5 * h * v[i, k]
                    k2q[i, k] = v[i, k] + 0.5 * h * k1v[i, k]
            if _accel(mm, qt, k2q, rr, sphere, potential, guard, g, k2v, &si, &sj):
                break
            # stage 3
            for i in range(n):
                for k in range(3):
                    qt[i, k] = q[i, k] + 0.5 * h * k2q[i, k]
                    k3q[i, k] = v[i, k] + 0.5 * h * k2v[i, k]
            if _accel(mm, qt, k3q, rr, sphere, potential, guard, g, k3v, &si, &sj):
                break
            # stage 4
            for i in range(n):
                for k in range(3):
                    qt[i, k] = q[i, k] + h * k3q[i, k]
                    k4q[i, k] = v[i, k] + h * k3v[i, k]
            if _accel(mm, qt, k4q, rr, sphere, potential, guard, g, k4v, &si, &sj):
                break
            for i in range(n):
                for k in range(3):
                    q[i, k] = q[i, k] + (h / 6.0) * (v[i, k] + 2.0 * k2q[i, k]
                                                     + 2.0 * k3q[i, k] + k4q[i, k])
                    v[i, k] = v[i, k] + (h / 6.0) * (k1v[i, k] + 2.0 * k2v[i, k]
                                                     + 2.0 * k3v[i, k] + k4v[i, k])
            if sphere:
                for i in range(n):
                    nrm = sqrt(q[i, 0] * q[i, 0] + q[i, 1] * q[i, 1] + q[i, 2] * q[i, 2])
                    for k in range(3):
                        q[i, k] *= rr[i] / nrm
                    dotqv = (q[i, 0] * v[i, 0] + q[i, 1] * v[i, 1] + q[i, 2] * v[i, 2]) \
                        / (rr[i] * rr[i])
                    for k in range(3):
                        v[i, k] -= dotqv * q[i, k]
        if si >= 0:
            break
        pview = pos[s]
        vview = vel[s]
        for i in range(n):
            for k in range(3):
                pview[i, k] = q[i, k]
                vview[i, k] = v[i, k]
    if si >= 0:
        return pos[:s], vel[:s], s - 1, si, sj
    return pos, vel, steps, -1, -1


def euler_rk4(inertia, omega0, double dt, Py_ssize_t steps):
    cdef double ix = inertia[0], iy = inertia[1], iz = inertia[2]
    cdef double cx = (iy - iz) / ix
    cdef double cy = (iz - ix) / iy
    cdef double cz = (ix - iy) / iz
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((steps + 1, 3))
    cdef double ox = omega0[0], oy = omega0[1], oz = omega0[2]
    cdef double h = dt
    cdef double ax1, ay1, az1, ax2, ay2, az2, ax3, ay3, az3, ax4, ay4, az4
    cdef double bx, by, bz, ex, ey, ez, fx, fy, fz
    cdef Py_ssize_t s
    out[0, 0] = ox
    out[0, 1] = oy
    out[0, 2] = oz
    with nogil:
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
            out[s, 0] = ox
            out[s, 1] = oy
            out[s, 2] = oz
    return out
