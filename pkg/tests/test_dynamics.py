import io
import math

import numpy as np
import pytest

from s2body._kernels_py import cot_value_grad, newt_value_grad
from s2body.dynamics import (Body, Configuration, acceleration, conserved,
                             conserved_csv, conserved_series,
                             cotangent_potential, integrate,
                             lagrange_multiplier, newtonian_potential,
                             so3_invariance_residual, trajectory_csv)
from s2body.errors import ConfigInvalid, SingularPair
from s2body.geom3 import rodrigues


def sphere_config(rng, n, speed=0.3, potential="cotangent"):
    q = rng.normal(size=(n, 3))
    q /= np.linalg.norm(q, axis=1)[:, None]
    v = rng.normal(size=(n, 3)) * speed
    v -= np.sum(v * q, axis=1)[:, None] * q
    bodies = [Body(rng.uniform(0.5, 2.0), q[i], v[i]) for i in range(n)]
    return Configuration(bodies, potential=potential)


RING_RATE = 2.5709709406228862  # balance rate of the pi/4 ring below


def perturbed_triangle():
    """Equilateral ring at colatitude pi/4 spun 2% above its balance rate:
    quasi-periodic, so long runs stay clear of close encounters."""
    th = math.pi / 4.0
    bodies = []
    for i in range(3):
        a = 2.0 * math.pi * i / 3.0
        q = np.array([math.sin(th) * math.cos(a),
                      math.sin(th) * math.sin(a), math.cos(th)])
        v = 1.02 * RING_RATE * np.cross([0.0, 0.0, 1.0], q)
        bodies.append(Body(1.0, q, v))
    return Configuration(bodies)


def test_cotangent_value_two_bodies():
    # pair angle pi/4: U = 2 cot(pi/4 -> gamma) with the ordered-pair double
    g = math.pi / 4.0
    c = Configuration([Body(1.0, [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]),
                       Body(1.0, [math.sin(g), 0.0, math.cos(g)], [0.0, 0.0, 0.0])])
    val, _ = cotangent_potential(c)
    assert val == pytest.approx(2.0 / math.tan(g), abs=1e-14)


def test_newtonian_value_pair_double():
    c = Configuration([Body(1.0, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]),
                       Body(1.0, [2.0, 0.0, 0.0], [0.0, 0.0, 0.0])],
                      space="flat", potential="newtonian")
    val, _ = newtonian_potential(c)
    assert val == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("fn", [cot_value_grad, newt_value_grad])
def test_gradients_match_finite_differences(fn):
    """The kernel gradient is the unconstrained R^3 gradient of the value."""
    rng = np.random.default_rng(11)
    m = rng.uniform(0.5, 2.0, size=4)
    q = rng.normal(size=(4, 3))
    q /= np.linalg.norm(q, axis=1)[:, None]
    val, grad, si, _ = fn(m, q)
    assert si < 0
    h = 1e-6
    for i in range(4):
        for a in range(3):
            qp, qm = q.copy(), q.copy()
            qp[i, a] += h
            qm[i, a] -= h
            vp = fn(m, qp)[0]
            vm = fn(m, qm)[0]
            fd = (vp - vm) / (2.0 * h)
            assert abs(fd - grad[i, a]) < 1e-6 * max(1.0, abs(grad[i, a]))


def test_cotangent_requires_unit_sphere():
    c = Configuration([Body(1.0, [0.0, 0.0, 2.0], [0.0, 0.0, 0.0]),
                       Body(1.0, [2.0, 0.0, 0.0], [0.0, 0.0, 0.0])],
                      potential="newtonian", radii=[2.0, 2.0])
    with pytest.raises(ConfigInvalid):
        cotangent_potential(c)


def test_singular_pairs_raise():
    with pytest.raises(SingularPair):
        cotangent_potential(Configuration(
            [Body(1.0, [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]),
             Body(1.0, [0.0, 0.0, -1.0], [0.0, 0.0, 0.0])]))
    err = None
    try:
        newtonian_potential(Configuration(
            [Body(1.0, [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]),
             Body(1.0, [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]),
             Body(1.0, [0.0, 1.0, 0.0], [0.0, 0.0, 0.0])],
            potential="newtonian"))
    except SingularPair as exc:
        err = exc
    assert err is not None and (err.i, err.j) == (0, 1)


def test_so3_invariance_residual_vanishes():
    rng = np.random.default_rng(12)
    for pot in ("cotangent", "newtonian"):
        c = sphere_config(rng, 5, potential=pot)
        assert np.max(np.abs(so3_invariance_residual(c))) < 1e-12


def test_acceleration_keeps_constraint():
    """q.a + |v|^2 = 0 per body, so |q| stays constant to second order."""
    rng = np.random.default_rng(13)
    c = sphere_config(rng, 4)
    acc = acceleration(c)
    for i, b in enumerate(c.bodies):
        assert abs(b.position @ acc[i] + b.velocity @ b.velocity) < 1e-12


def test_lagrange_multiplier_consistency():
    rng = np.random.default_rng(14)
    c = sphere_config(rng, 3)
    _, grad = cotangent_potential(c)
    acc = acceleration(c)
    for i, b in enumerate(c.bodies):
        lam = lagrange_multiplier(b, grad[i])
        assert np.allclose(acc[i], (2.0 * lam * b.position + grad[i]) / b.mass,
                           atol=1e-14)


def test_flat_circular_orbit():
    # equal masses, separation 2: force 1/2 balances v^2 at v = 1/sqrt(2)
    v = 1.0 / math.sqrt(2.0)
    c = Configuration([Body(1.0, [1.0, 0.0, 0.0], [0.0, v, 0.0]),
                       Body(1.0, [-1.0, 0.0, 0.0], [0.0, -v, 0.0])],
                      space="flat", potential="newtonian")
    dt = 1e-3
    steps = 2000
    traj = integrate(c, dt, steps)
    om = v  # angular rate around the origin
    for k in (500, 1500, 2000):
        a = om * traj.times[k]
        expect = np.array([math.cos(a), math.sin(a), 0.0])
        assert np.max(np.abs(traj.positions[k, 0] - expect)) < 1e-9
        assert np.max(np.abs(traj.positions[k, 1] + expect)) < 1e-9


def test_integrate_conserves_energy_and_momentum():
    c = perturbed_triangle()
    E0 = conserved(c).total
    traj = integrate(c, 1e-3, 2000)
    assert not traj.aborted
    K, U, E, C = conserved_series(traj)
    assert np.max(np.abs(E - E0)) / abs(E0) < 1e-10
    c0 = C[0]
    assert np.max(np.linalg.norm(C - c0, axis=1)) / np.linalg.norm(c0) < 1e-10


def test_integrate_keeps_sphere_constraint():
    traj = integrate(perturbed_triangle(), 1e-3, 500)
    rad = np.linalg.norm(traj.positions, axis=2)
    assert np.max(np.abs(rad - 1.0)) < 1e-12
    tang = np.abs(np.einsum("kij,kij->ki", traj.positions, traj.velocities))
    assert np.max(tang) < 1e-12


def test_integrate_equivariance_under_rotation():
    c = perturbed_triangle()
    R = rodrigues(np.array([0.3, -0.8, 0.5]))
    rc = c.with_state(c.positions @ R.T, c.velocities @ R.T)
    t1 = integrate(c, 1e-3, 200)
    t2 = integrate(rc, 1e-3, 200)
    assert np.max(np.abs(t2.positions - t1.positions @ R.T)) < 1e-11
    assert np.max(np.abs(t2.velocities - t1.velocities @ R.T)) < 1e-11


def test_integrate_aborts_on_collision():
    c = Configuration([Body(1.0, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
                       Body(1.0, [0.0, 1.0, 0.0], [1.0, 0.0, 0.0])])
    traj = integrate(c, 1e-2, 500)
    assert traj.aborted
    assert traj.singular_pair == (0, 1)
    assert traj.n_samples < 501
    assert np.all(np.isfinite(traj.positions))
    # partial trajectory still usable
    snap = traj.snapshot(traj.n_samples - 1)
    assert snap.positions.shape == (2, 3)


def test_integrate_argument_validation():
    c = perturbed_triangle()
    with pytest.raises(ValueError):
        integrate(c, 0.0, 10)
    with pytest.raises(ValueError):
        integrate(c, 1e-3, 0)


@pytest.mark.parametrize("make", [
    lambda: Configuration([], space="sphere"),
    lambda: Configuration([Body(0.0, [0, 0, 1], [0, 0, 0])]),
    lambda: Configuration([Body(1.0, [0, 0, 0.5], [0, 0, 0])], radii=[1.0]),
    lambda: Configuration([Body(1.0, [0, 0, 1], [0, 0, 1e-3])]),
    lambda: Configuration([Body(1.0, [0, 0, 1], [0, 0, 0])], space="torus"),
    lambda: Configuration([Body(1.0, [0, 0, 1], [0, 0, 0])], potential="hooke"),
    lambda: Configuration([Body(1.0, [0, 0, 1], [0, 0, 0])], space="flat",
                          potential="cotangent"),
    lambda: Configuration([Body(1.0, [0, 0, 2], [0, 0, 0])], radii=[2.0]),
    lambda: Configuration([Body(1.0, [0, 0, 1], [0, 0, 0])], radii=[1.0, 1.0]),
])
def test_configuration_rejects_bad_input(make):
    with pytest.raises(ConfigInvalid):
        make()


def test_json_round_trip():
    rng = np.random.default_rng(15)
    c = sphere_config(rng, 3)
    back = Configuration.from_json(c.to_json())
    assert back.space == c.space and back.potential == c.potential
    assert np.array_equal(back.positions, c.positions)
    assert np.array_equal(back.velocities, c.velocities)
    assert np.array_equal(back.masses, c.masses)
    assert np.array_equal(back.radii, c.radii)


def test_json_velocity_defaults_to_rest():
    c = Configuration.from_json(
        '{"bodies": [{"mass": 1.0, "position": [0, 0, 1]}]}')
    assert np.array_equal(c.velocities, np.zeros((1, 3)))


def test_json_malformed_rejected():
    with pytest.raises(ConfigInvalid):
        Configuration.from_json("[1, 2]")
    with pytest.raises(ConfigInvalid):
        Configuration.from_json('{"bodies": [{"position": [0, 0, 1]}]}')
    with pytest.raises(ConfigInvalid):
        Configuration.from_json("{nope}")


def test_csv_writers_round_trip():
    traj = integrate(perturbed_triangle(), 1e-3, 10)
    buf = io.StringIO()
    trajectory_csv(traj, buf)
    lines = buf.getvalue().splitlines()
    head = "time," + ",".join(
        f"x{i},y{i},z{i},vx{i},vy{i},vz{i}" for i in range(3))
    assert lines[0] == head
    assert len(lines) == 1 + traj.n_samples
    row = [float(x) for x in lines[5].split(",")]  # sample 4
    assert row[0] == traj.times[4]
    assert row[1 + 6 * 1:4 + 6 * 1] == list(traj.positions[4, 1])
    assert row[4 + 6 * 1:7 + 6 * 1] == list(traj.velocities[4, 1])

    buf = io.StringIO()
    conserved_csv(traj, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "time,kinetic,potential,total,cx,cy,cz"
    assert len(lines) == 1 + traj.n_samples
    first = [float(x) for x in lines[1].split(",")]
    ref = conserved(traj.snapshot(0))
    assert first[3] == ref.total


def test_conserved_series_matches_pointwise():
    traj = integrate(perturbed_triangle(), 1e-3, 5)
    K, U, E, C = conserved_series(traj)
    assert K.shape == U.shape == E.shape == (6,)
    assert C.shape == (6, 3)
    ref = conserved(traj.snapshot(0))
    assert K[0] == ref.kinetic and U[0] == ref.potential
    assert np.array_equal(C[0], ref.angular_momentum)
