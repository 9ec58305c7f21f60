"""Jacobi elliptic functions sn, cn, dn and the complete integral K(k).

Evaluation is by the arithmetic-geometric mean with the descending Landen
recursion for the amplitude (Abramowitz & Stegun 16.4). The argument is
reduced modulo the real period 4K first, so accuracy is uniform for large
|tau|. Moduli within 1e-10 of 1 dispatch to the exact hyperbolic forms,
where the AGM amplitude recursion loses accuracy.
"""
import math
from typing import NamedTuple

import numpy as np

from .errors import ModulusOutOfRange

AGM_TOL = 1e-14
_MAX_ITER = 32
SEPARATRIX_BAND = 1e-10  # |k^2 - 1| below this uses tanh/sech


class JacobiTriple(NamedTuple):
    sn: float
    cn: float
    dn: float


def _agm_scales(k2):
    """AGM sequence (a_n, b_n, c_n) starting from (1, k', k)."""
    a = [1.0]
    b = [math.sqrt(1.0 - k2)]
    c = [math.sqrt(k2)]
    while c[-1] > AGM_TOL * a[-1] and len(a) < _MAX_ITER:
        an, bn = a[-1], b[-1]
        a.append(0.5 * (an + bn))
        b.append(math.sqrt(an * bn))
        c.append(0.5 * (an - bn))
    return a, b, c


def complete_K(k2):
    """Complete elliptic integral of the first kind, K = pi/(2 a_N)."""
    if not 0.0 <= k2 < 1.0:
        raise ModulusOutOfRange(f"complete_K needs 0 <= k^2 < 1, got {k2}")
    a, _, _ = _agm_scales(k2)
    return math.pi / (2.0 * a[-1])


def jacobi(tau, k2):
    """(sn, cn, dn)(tau, k). Accepts 0 <= k^2 <= 1 (+1e-10 slack so values
    classified as separatrix by tolerance still evaluate)."""
    if k2 < 0.0 or k2 > 1.0 + SEPARATRIX_BAND:
        raise ModulusOutOfRange(f"jacobi needs 0 <= k^2 <= 1, got {k2}")
    if abs(k2 - 1.0) < SEPARATRIX_BAND:
        sech = 1.0 / math.cosh(tau)
        return JacobiTriple(math.tanh(tau), sech, sech)

    a, _, c = _agm_scales(k2)
    n = len(a) - 1
    K = math.pi / (2.0 * a[-1])
    tau = tau - 4.0 * K * np.round(tau / (4.0 * K))

    phi = (2.0 ** n) * a[-1] * tau
    for idx in range(n, 0, -1):
        s = min(1.0, max(-1.0, c[idx] / a[idx] * math.sin(phi)))
        phi = 0.5 * (phi + math.asin(s))
    sn = math.sin(phi)
    cn = math.cos(phi)
    # the textbook cos-ratio form for dn is 0/0 at quarter periods; this is
    # stable for k^2 away from 1, which the hyperbolic band guarantees
    dn = math.sqrt(max(0.0, 1.0 - k2 * sn * sn))
    return JacobiTriple(sn, cn, dn)
