"""Command-line entry point.

Modes: simulate, euler-flow, classify, verify-theorem, find-re, contours.
One JSON config per run; CSV numbers use 17 significant digits so doubles
round-trip; JSON reports are sorted and indented. Exit codes: 0 success,
2 validation error, 3 singularity abort, 4 I/O error.
"""
import argparse
import json
import math
import sys

import numpy as np

from .analysis import find_relative_equilibrium, verify_theorem
from .dynamics import Configuration, conserved_csv, integrate, trajectory_csv
from .elliptic import complete_K
from .errors import (BoundaryCase, ConfigInvalid, NotAsymmetric, S2BodyError,
                     SingularPair)
from .rigidbody import (EulerFlowState, PrincipalFrame, classification_report,
                        classify, closed_form_omega, closed_form_tau_offset,
                        inertia_tensor, integrals_of, integrate_euler,
                        modulus_k2, principal_frame, tau_rate)

_MODES = ("simulate", "euler-flow", "classify", "verify-theorem", "find-re",
          "contours")


def _fmt(x):
    return f"{float(x):.17g}"


def _say(quiet, msg):
    if not quiet:
        print(msg)


def _load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}: bad JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigInvalid(f"{path}: top-level JSON value must be an object")
    return doc


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True))
        fh.write("\n")


def _positive_real(doc, key, default):
    v = doc.get(key, default)
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ConfigInvalid(f"'{key}' must be a number, got {v!r}")
    if not v > 0.0 or not math.isfinite(v):
        raise ConfigInvalid(f"'{key}' must be positive and finite, got {v}")
    return v


def _step_count(doc, key, default):
    v = doc.get(key, default)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ConfigInvalid(f"'{key}' must be an integer >= 1, got {v!r}")
    return v


def _vec3(doc, key):
    v = doc.get(key)
    try:
        arr = np.array(v, dtype=float)
    except (TypeError, ValueError):
        raise ConfigInvalid(f"'{key}' must be a 3-vector, got {v!r}")
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigInvalid(f"'{key}' must be a finite 3-vector, got {v!r}")
    return arr


def _configuration_from(doc):
    if "configuration" in doc:
        return Configuration.from_dict(doc["configuration"])
    if "configuration_path" in doc:
        with open(doc["configuration_path"], "r", encoding="utf-8") as fh:
            return Configuration.from_json(fh.read())
    raise ConfigInvalid("need 'configuration' (inline) or 'configuration_path'")


def _inline_frame(doc):
    """Synthetic principal frame from an explicit ascending moment triple."""
    I = _vec3(doc, "I")
    if not (I[0] <= I[1] <= I[2]):
        raise ConfigInvalid(f"'I' must be ascending, got {I.tolist()}")
    if I[0] < 0.0:
        raise ConfigInvalid(f"moments must be nonnegative, got {I.tolist()}")
    return PrincipalFrame(float(I[0]), float(I[1]), float(I[2]),
                          np.eye(3), np.zeros((0, 3)))


def _run_simulate(doc, out, quiet):
    c = _configuration_from(doc)
    dt = _positive_real(doc, "dt", 1e-3)
    steps = _step_count(doc, "steps", 1000)
    traj = integrate(c, dt, steps)

    traj_path = f"{out}_trajectory.csv"
    with open(traj_path, "w", encoding="utf-8", newline="\n") as fh:
        trajectory_csv(traj, fh)
    _say(quiet, f"wrote {traj_path} ({traj.n_samples} samples)")

    cons_path = f"{out}_conserved.csv"
    with open(cons_path, "w", encoding="utf-8", newline="\n") as fh:
        try:
            conserved_csv(traj, fh)
        except SingularPair:
            # the final stored sample of an aborted run can itself be
            # singular for the potential; trajectory rows are already on disk
            pass
    _say(quiet, f"wrote {cons_path}")

    if traj.aborted:
        i, j = traj.singular_pair
        print(f"run aborted at t={traj.times[-1]:g}: bodies {i} and {j} "
              f"hit the singular set; partial output kept", file=sys.stderr)
        return 3
    return 0


def _symmetric_top_closed(moments, om0, t):
    """Trig closed form when two moments coincide: the component along the
    symmetry axis is constant and the transverse pair precesses uniformly."""
    ix, iy, iz = moments
    scale = max(abs(ix), abs(iy), abs(iz), 1e-300)
    if iy - ix <= iz - iy:          # pair (x, y), symmetry axis z
        i0 = 0.5 * (ix + iy)
        rate = (iz - i0) / i0 * om0[2]
        ct, st = math.cos(rate * t), math.sin(rate * t)
        return np.array([om0[0] * ct - om0[1] * st,
                         om0[0] * st + om0[1] * ct,
                         om0[2]])
    i0 = 0.5 * (iy + iz)            # pair (y, z), symmetry axis x
    rate = (i0 - ix) / i0 * om0[0]
    ct, st = math.cos(rate * t), math.sin(rate * t)
    return np.array([om0[0],
                     om0[1] * ct + om0[2] * st,
                     om0[2] * ct - om0[1] * st])


def _run_euler_flow(doc, out, quiet):
    pf = _inline_frame(doc)
    if "omega" in doc:
        om0 = _vec3(doc, "omega")
    elif "twoK" in doc and "C2" in doc:
        om0 = np.asarray(closed_form_omega(0.0, float(doc["twoK"]),
                                           float(doc["C2"]), pf))
    else:
        raise ConfigInvalid("need 'omega' or both 'twoK' and 'C2'")
    dt = _positive_real(doc, "dt", 1e-3)
    steps = _step_count(doc, "steps", 10_000)

    state = EulerFlowState(om0, pf)
    twoK, C2 = state.twoK, state.C2
    path = integrate_euler(state, dt, steps)
    tag = classify(twoK, C2, pf, om0).tag

    closed = None
    try:
        sigma = tau_rate(twoK, C2, pf)
        tau0, signs = closed_form_tau_offset(state)
        taus = tau0 + sigma * path.times

        def closed(k):
            return np.asarray(closed_form_omega(taus[k], twoK, C2, pf, signs))
    except (NotAsymmetric, BoundaryCase):
        taus = path.times.copy()
        if tag == "SymmetricTop":
            def closed(k):
                return _symmetric_top_closed(pf.moments, om0, path.times[k])
        else:
            def closed(k):
                return om0

    om_path_file = f"{out}_omega.csv"
    cmp_file = f"{out}_closed_form.csv"
    with open(om_path_file, "w", encoding="utf-8", newline="\n") as fh, \
            open(cmp_file, "w", encoding="utf-8", newline="\n") as fc:
        fh.write("time,tau,Ox,Oy,Oz,twoK,C2\n")
        fc.write("time,tau,Ox,Oy,Oz,Ox_closed,Oy_closed,Oz_closed,gap\n")
        for k in range(len(path.times)):
            om = path.omegas[k]
            tk, ck = integrals_of(pf.moments, om)
            fh.write(",".join(_fmt(v) for v in
                              (path.times[k], taus[k], om[0], om[1], om[2],
                               tk, ck)) + "\n")
            cf = closed(k)
            gap = float(np.max(np.abs(cf - om)))
            fc.write(",".join(_fmt(v) for v in
                              (path.times[k], taus[k], om[0], om[1], om[2],
                               cf[0], cf[1], cf[2], gap)) + "\n")
    _say(quiet, f"wrote {om_path_file} and {cmp_file} "
                f"({len(path.times)} samples, class {tag})")
    return 0


def _run_classify(doc, out, quiet):
    if "I" in doc:
        pf = _inline_frame(doc)
        om = _vec3(doc, "omega")
    else:
        c = _configuration_from(doc)
        pf = principal_frame(inertia_tensor(c.masses, c.positions),
                             c.positions)
        om = pf.frame.T @ _vec3(doc, "omega")
    twoK, C2 = integrals_of(pf.moments, om)
    report = classification_report(twoK, C2, pf, om)
    path = f"{out}_classification.json"
    _write_json(path, report)
    _say(quiet, f"wrote {path} (tag {report['tag']})")
    return 0


def _run_verify(doc, out, quiet):
    c = _configuration_from(doc)
    dt = _positive_real(doc, "dt", 1e-3)
    steps = _step_count(doc, "steps", 10_000)
    tols = doc.get("tolerances", {})
    kwargs = {}
    if "rigidity" in tols:
        kwargs["rigidity_tol"] = float(tols["rigidity"])
    report = verify_theorem(c, dt, steps, **kwargs)
    path = f"{out}_verification.json"
    _write_json(path, report)
    _say(quiet, f"wrote {path} (rigid: {report['rigidity']['is_rigid']})")
    if report["aborted"]:
        print("integration aborted on a singular pair; report reflects the "
              "partial trajectory", file=sys.stderr)
        return 3
    return 0


def _run_find_re(doc, out, quiet):
    c = _configuration_from(doc)
    axis = _vec3(doc, "axis")
    rng = doc.get("omega_range")
    if (not isinstance(rng, (list, tuple)) or len(rng) != 2
            or not all(isinstance(v, (int, float)) for v in rng)
            or not float(rng[0]) < float(rng[1])):
        raise ConfigInvalid(f"'omega_range' must be [lo, hi], got {rng!r}")
    w, residual = find_relative_equilibrium(c, axis, (float(rng[0]),
                                                      float(rng[1])))
    unit = axis / np.linalg.norm(axis)
    payload = {
        "omega": w,
        "axis": [float(v) for v in unit],
        "omega_vector": [float(v) for v in w * unit],
        "residual": residual,
    }
    path = f"{out}_re.json"
    _write_json(path, payload)
    _say(quiet, f"wrote {path} (omega {w:.12g}, residual {residual:.3e})")
    return 0


def _contour_rows(pf, twoK, C2, samples):
    """Sample the intersection of the 2K-ellipsoid with one |C|^2 level as
    (branch, tau, omega) rows via the closed-form curves."""
    k2 = modulus_k2(twoK, C2, pf)
    rows = []
    if abs(k2 - 1.0) < 1e-9:
        taus = np.linspace(-8.0, 8.0, samples)
        for sx in (1, -1):
            for sz in (1, -1):
                name = f"sep{'+' if sx > 0 else '-'}{'+' if sz > 0 else '-'}"
                for t in taus:
                    rows.append((k2, name, t,
                                 closed_form_omega(t, twoK, C2, pf, (sx, sz))))
    elif k2 < 1.0:
        period = 4.0 * complete_K(k2)
        taus = np.linspace(0.0, period, samples)
        for sz, name in ((1, "loop+z"), (-1, "loop-z")):
            for t in taus:
                rows.append((k2, name, t,
                             closed_form_omega(t, twoK, C2, pf, (1, sz))))
    else:
        period = 4.0 * complete_K(1.0 / k2)
        taus = np.linspace(0.0, period, samples)
        for sx, name in ((1, "loop+x"), (-1, "loop-x")):
            for t in taus:
                rows.append((k2, name, t,
                             closed_form_omega(t, twoK, C2, pf, (sx, 1))))
    return rows


def _run_contours(doc, out, quiet):
    pf = _inline_frame(doc)
    ix, iy, iz = pf.moments
    scale = max(abs(ix), abs(iy), abs(iz), 1e-300)
    if iy - ix <= 1e-9 * scale or iz - iy <= 1e-9 * scale:
        raise ConfigInvalid("contours need a strictly asymmetric I")
    twoK = _positive_real(doc, "twoK", 2.0)
    samples = _step_count(doc, "samples", 256)
    if "C2_values" in doc:
        try:
            c2s = [float(v) for v in doc["C2_values"]]
        except (TypeError, ValueError):
            raise ConfigInvalid("'C2_values' must be a list of numbers")
    else:
        n = _step_count(doc, "n_contours", 9)
        c2s = [twoK * (ix + j * (iz - ix) / (n + 1)) for j in range(1, n + 1)]

    band = max(abs(twoK * iz), 1e-300)
    path = f"{out}_contours.csv"
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("C2,k2,branch,tau,Ox,Oy,Oz\n")

        def emit(c2, k2, branch, tau, om):
            r1 = abs(ix * om[0] ** 2 + iy * om[1] ** 2 + iz * om[2] ** 2
                     - twoK)
            r2 = abs(ix ** 2 * om[0] ** 2 + iy ** 2 * om[1] ** 2
                     + iz ** 2 * om[2] ** 2 - c2)
            if max(r1, r2) > 1e-10 * max(1.0, band):
                raise S2BodyError(
                    f"contour point off the quadrics by {max(r1, r2):.3e}")
            fh.write(",".join([_fmt(c2), _fmt(k2), branch] +
                              [_fmt(v) for v in (tau, om[0], om[1], om[2])])
                     + "\n")

        for c2 in c2s:
            if not twoK * ix <= c2 <= twoK * iz:
                raise ConfigInvalid(
                    f"C2={c2} outside the band [{twoK * ix}, {twoK * iz}]")
            if (abs(c2 - twoK * ix) <= 1e-10 * band
                    or abs(c2 - twoK * iz) <= 1e-10 * band):
                continue  # boundary levels degenerate to the fixed points
            for k2, name, tau, om in _contour_rows(pf, twoK, c2, samples):
                emit(c2, k2, name, tau, om)
                count += 1
        for axis, moment, k2 in ((0, ix, math.inf), (1, iy, 1.0),
                                 (2, iz, 0.0)):
            amp = math.sqrt(twoK / moment)
            for sgn, tag in ((1.0, "+"), (-1.0, "-")):
                om = np.zeros(3)
                om[axis] = sgn * amp
                emit(twoK * moment, k2, f"fixed{tag}{'xyz'[axis]}", 0.0, om)
                count += 1
    _say(quiet, f"wrote {path} ({count} points, {len(c2s)} levels)")
    return 0


_HANDLERS = {
    "simulate": _run_simulate,
    "euler-flow": _run_euler_flow,
    "classify": _run_classify,
    "verify-theorem": _run_verify,
    "find-re": _run_find_re,
    "contours": _run_contours,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="s2body",
        description="Point masses on spheres, Euler flows, and rigid-motion "
                    "verification. One JSON config per run; outputs CSV/JSON "
                    "under the --out prefix.")
    parser.add_argument("mode", choices=_MODES)
    parser.add_argument("--config", required=True,
                        help="path to the JSON run configuration")
    parser.add_argument("--out", default="out",
                        help="output path prefix (default: out)")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress stdout status lines")
    args = parser.parse_args(argv)

    try:
        doc = _load_config(args.config)
        return _HANDLERS[args.mode](doc, args.out, args.quiet)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SingularPair as exc:
        print(f"singular pair: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except S2BodyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
