"""N-body dynamics: potentials, constrained equations of motion on the
sphere, free motion in flat space, integration, conserved quantities, and
(de)serialization.

Pair-counting convention: potential sums run over ordered pairs i != j, so
each unordered pair contributes twice. Values and gradients both follow it.
In flat mode this makes the effective gravitational constant 2.

Sign convention: the Lagrangian is K + U (potential added), so the conserved
total energy is E = K - U. Comparisons against codes using L = K - V must
flip the sign of the potential.
"""
import json
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from . import kernels
from ._kernels_py import cot_value_grad, newt_value_grad
from .errors import ConfigInvalid, SingularPair

SPACE_SPHERE = "sphere"
SPACE_FLAT = "flat"
POT_COTANGENT = "cotangent"
POT_NEWTONIAN = "newtonian"

CONSTRAINT_TOL = 1e-9  # | |q|-r | and |q.v| at validation


@dataclass
class Body:
    mass: float
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)


@dataclass
class Configuration:
    """State of the N-body system plus the space/potential selectors.

    In sphere mode radii default to the initial |position_i| and stay fixed.
    """
    bodies: list
    space: str = SPACE_SPHERE
    potential: str = POT_COTANGENT
    radii: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.space not in (SPACE_SPHERE, SPACE_FLAT):
            raise ConfigInvalid(f"unknown space {self.space!r}")
        if self.potential not in (POT_COTANGENT, POT_NEWTONIAN):
            raise ConfigInvalid(f"unknown potential {self.potential!r}")
        if len(self.bodies) < 1:
            raise ConfigInvalid("need at least one body")
        if self.space == SPACE_SPHERE:
            if self.radii is None:
                self.radii = np.array(
                    [np.linalg.norm(b.position) for b in self.bodies])
            else:
                self.radii = np.asarray(self.radii, dtype=float)
                if self.radii.shape != (len(self.bodies),):
                    raise ConfigInvalid("radii length mismatch")
        else:
            self.radii = None
        self.validate()

    def validate(self, tol=CONSTRAINT_TOL):
        for i, b in enumerate(self.bodies):
            if not b.mass > 0:
                raise ConfigInvalid(f"body {i}: mass must be positive")
            if b.position.shape != (3,) or b.velocity.shape != (3,):
                raise ConfigInvalid(f"body {i}: position/velocity must be 3-vectors")
            if not (np.all(np.isfinite(b.position)) and np.all(np.isfinite(b.velocity))):
                raise ConfigInvalid(f"body {i}: non-finite state")
        if self.space == SPACE_SPHERE:
            for i, b in enumerate(self.bodies):
                r = self.radii[i]
                if r <= 0:
                    raise ConfigInvalid(f"body {i}: radius must be positive")
                if abs(np.linalg.norm(b.position) - r) > tol:
                    raise ConfigInvalid(f"body {i}: |position| off the sphere radius {r}")
                if abs(b.position @ b.velocity) > tol * max(1.0, r * r):
                    raise ConfigInvalid(f"body {i}: velocity not tangent")
            if self.potential == POT_COTANGENT and np.any(np.abs(self.radii - 1.0) > tol):
                raise ConfigInvalid("cotangent potential requires unit radii")
        elif self.potential == POT_COTANGENT:
            raise ConfigInvalid("cotangent potential requires sphere mode")

    @property
    def n(self):
        return len(self.bodies)

    @property
    def masses(self):
        return np.array([b.mass for b in self.bodies])

    @property
    def positions(self):
        return np.array([b.position for b in self.bodies])

    @property
    def velocities(self):
        return np.array([b.velocity for b in self.bodies])

    def with_state(self, positions, velocities):
        """Same masses/space/potential, new state (skips re-validation of
        tangency: used for trajectory snapshots)."""
        new = object.__new__(Configuration)
        new.bodies = [Body(b.mass, p, v)
                      for b, p, v in zip(self.bodies, positions, velocities)]
        new.space = self.space
        new.potential = self.potential
        new.radii = None if self.radii is None else self.radii.copy()
        return new

    def to_dict(self):
        doc = {
            "space": self.space,
            "potential": self.potential,
            "bodies": [{"mass": float(b.mass),
                        "position": [float(x) for x in b.position],
                        "velocity": [float(x) for x in b.velocity]}
                       for b in self.bodies],
        }
        if self.radii is not None:
            doc["radii"] = [float(r) for r in self.radii]
        return doc

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigInvalid("configuration document must be an object")
        try:
            bodies = [Body(float(b["mass"]),
                           np.array(b["position"], dtype=float),
                           np.array(b.get("velocity", (0.0, 0.0, 0.0)),
                                    dtype=float))
                      for b in doc["bodies"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"malformed bodies list: {exc}") from exc
        radii = doc.get("radii")
        return cls(bodies,
                   space=doc.get("space", SPACE_SPHERE),
                   potential=doc.get("potential", POT_COTANGENT),
                   radii=None if radii is None else np.array(radii, dtype=float))

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"bad JSON: {exc}") from exc
        return cls.from_dict(doc)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


class ConservedSet(NamedTuple):
    kinetic: float
    potential: float
    total: float               # kinetic - potential
    angular_momentum: np.ndarray


@dataclass
class Trajectory:
    times: np.ndarray          # (S,)
    positions: np.ndarray      # (S, N, 3)
    velocities: np.ndarray     # (S, N, 3)
    template: Configuration    # masses + space/potential of the run
    aborted: bool = False
    singular_pair: Optional[Tuple[int, int]] = None

    @property
    def n_samples(self):
        return len(self.times)

    @property
    def n_bodies(self):
        return self.positions.shape[1]

    def snapshot(self, k):
        return self.template.with_state(self.positions[k], self.velocities[k])


def _value_grad(c: Configuration):
    """Dispatch to the potential kernel; raises SingularPair."""
    m = c.masses
    q = c.positions
    if c.potential == POT_COTANGENT:
        val, grad, si, sj = cot_value_grad(m, q, kernels.COT_GUARD)
    else:
        val, grad, si, sj = newt_value_grad(m, q, kernels.NEWT_GUARD)
    if si >= 0:
        raise SingularPair(si, sj)
    return val, grad


def cotangent_potential(c: Configuration):
    """U = sum_{i!=j} m_i m_j (q_i.q_j)/sqrt(1-(q_i.q_j)^2) on the unit
    sphere, with d U/d q_i = sum_{j!=i} 2 m_i m_j (1-(q_i.q_j)^2)^{-3/2} q_j."""
    if c.space != SPACE_SPHERE or np.any(np.abs(c.radii - 1.0) > CONSTRAINT_TOL):
        raise ConfigInvalid("cotangent potential requires unit-radius sphere mode")
    val, grad, si, sj = cot_value_grad(c.masses, c.positions, kernels.COT_GUARD)
    if si >= 0:
        raise SingularPair(si, sj)
    return val, grad


def newtonian_potential(c: Configuration):
    """U = sum_{i!=j} m_i m_j / |q_i - q_j| and its gradient. Defined in flat
    mode and, being rotation invariant, also accepted on spheres of general
    radii (the collinear-axis construction needs it there)."""
    val, grad, si, sj = newt_value_grad(c.masses, c.positions, kernels.NEWT_GUARD)
    if si >= 0:
        raise SingularPair(si, sj)
    return val, grad


def so3_invariance_residual(c: Configuration):
    """sum_i q_i x dU/dq_i; zero for any rotation-invariant potential."""
    _, grad = _value_grad(c)
    return np.sum(np.cross(c.positions, grad), axis=0)


def lagrange_multiplier(b: Body, grad):
    """Radial multiplier keeping |q_i| constant:
    lambda_i = -(m_i |v_i|^2 + q_i.grad_i) / (2 r_i^2)."""
    grad = np.asarray(grad, dtype=float)
    r2 = b.position @ b.position
    return -(b.mass * (b.velocity @ b.velocity) + b.position @ grad) / (2.0 * r2)


def acceleration(c: Configuration):
    """Per-body accelerations: (2 lambda_i q_i + dU/dq_i)/m_i on the sphere,
    dU/dq_i / m_i in flat mode."""
    _, grad = _value_grad(c)
    m = c.masses
    if c.space == SPACE_FLAT:
        return grad / m[:, None]
    q = c.positions
    v = c.velocities
    lam = -(m * np.einsum("ij,ij->i", v, v) + np.einsum("ij,ij->i", q, grad)) \
        / (2.0 * c.radii ** 2)
    return (2.0 * lam[:, None] * q + grad) / m[:, None]


def integrate(c: Configuration, dt, steps) -> Trajectory:
    """Fixed-step RK4 run; sphere mode renormalizes radius and re-projects
    velocity after each step. A singular pair stops the run early: the
    returned trajectory is partial with aborted=True."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not steps >= 1:
        raise ValueError("steps must be >= 1")
    sphere = c.space == SPACE_SPHERE
    radii = c.radii if sphere else np.ones(c.n)
    pot_id = 0 if c.potential == POT_COTANGENT else 1
    guard = kernels.COT_GUARD if pot_id == 0 else kernels.NEWT_GUARD
    pos, vel, done, si, sj = kernels.nbody_rk4(
        c.masses, c.positions, c.velocities, radii, float(dt), int(steps),
        sphere, pot_id, guard)
    times = np.arange(done + 1) * dt
    aborted = done < steps
    return Trajectory(times, pos, vel, c, aborted,
                      (si, sj) if aborted else None)


def conserved(c: Configuration) -> ConservedSet:
    """Kinetic energy, potential, total E = K - U, and c = sum m_i q_i x v_i."""
    val, _ = _value_grad(c)
    m = c.masses
    v = c.velocities
    kin = 0.5 * float(np.sum(m * np.einsum("ij,ij->i", v, v)))
    ang = np.sum(m[:, None] * np.cross(c.positions, v), axis=0)
    return ConservedSet(kin, val, kin - val, ang)


def conserved_series(traj: Trajectory):
    """conserved() along a trajectory: arrays (K, U, E) of shape (S,) and
    c of shape (S, 3)."""
    S = traj.n_samples
    m = traj.template.masses
    pot_id = 0 if traj.template.potential == POT_COTANGENT else 1
    K = np.empty(S)
    U = np.empty(S)
    C = np.empty((S, 3))
    for k in range(S):
        q = traj.positions[k]
        v = traj.velocities[k]
        if pot_id == 0:
            val, _, si, sj = cot_value_grad(m, q, kernels.COT_GUARD)
        else:
            val, _, si, sj = newt_value_grad(m, q, kernels.NEWT_GUARD)
        if si >= 0:
            raise SingularPair(si, sj)
        K[k] = 0.5 * np.sum(m * np.einsum("ij,ij->i", v, v))
        U[k] = val
        C[k] = np.sum(m[:, None] * np.cross(q, v), axis=0)
    return K, U, K - U, C


def _fmt(x):
    return f"{float(x):.17g}"


def trajectory_csv(traj: Trajectory, stream):
    """time, then x,y,z,vx,vy,vz per body; 17 significant digits, LF."""
    n = traj.n_bodies
    cols = ["time"]
    for i in range(n):
        cols += [f"x{i}", f"y{i}", f"z{i}", f"vx{i}", f"vy{i}", f"vz{i}"]
    stream.write(",".join(cols) + "\n")
    for k in range(traj.n_samples):
        row = [_fmt(traj.times[k])]
        for i in range(n):
            row += [_fmt(v) for v in traj.positions[k, i]]
            row += [_fmt(v) for v in traj.velocities[k, i]]
        stream.write(",".join(row) + "\n")


def conserved_csv(traj: Trajectory, stream):
    K, U, E, C = conserved_series(traj)
    stream.write("time,kinetic,potential,total,cx,cy,cz\n")
    for k in range(traj.n_samples):
        row = [_fmt(traj.times[k]), _fmt(K[k]), _fmt(U[k]), _fmt(E[k]),
               _fmt(C[k, 0]), _fmt(C[k, 1]), _fmt(C[k, 2])]
        stream.write(",".join(row) + "\n")
