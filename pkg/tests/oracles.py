"""Independent reference implementations shared by the unit and acceptance tests.

Each one reaches the checked quantity by a different method (quadrature, bisection,
brute-force search, enumeration); only scalar inputs are borrowed from the package.
"""

import itertools
import math

import mpmath as mp
import numpy as np

from auxskin import addressing as ad
from auxskin import auc
from auxskin import spring_array as sa

mp.mp.dps = 40


# ---- high-precision single-cell formulas

def mp_sigma(V, eps_r, d):
    return mp.mpf("8.854e-12") * eps_r / 2 * (mp.mpf(V) / d) ** 2


def mp_tau_ea(V, eps_r, d, mu, a_ov):
    # friction torque = mu * sigma * integral of r over the square pad
    return mu * mp_sigma(V, eps_r, d) * mp_pad_integral(a_ov)


def mp_pad_integral(side):
    # four identical quadrants; the kink of r at the origin sits on a corner
    half = mp.mpf(side) / 2
    return 4 * mp.quad(lambda x, y: mp.sqrt(x * x + y * y), [0, half], [0, half])


def mp_tau_j(theta, E, delta, t, c):
    return 2 * mp.mpf(E) / 3 * mp.mpf(delta) ** 3 * t / c * theta


def rel(a, b):
    return abs(float(a) - float(b)) / abs(float(b))


# ---- equilibrium by bisection on the Coulomb branches

def bisect_oracle(f, geom, hfp, p, theta_prev=0.0):
    k_j = auc.hinge_rotational_stiffness(geom, p)
    tau = float(auc.stack_friction_torque(geom, hfp, p))
    net = lambda th: f * geom.a * (math.cos(th) - math.sin(th)) - k_j * th  # noqa: E731
    drive = net(theta_prev)
    if abs(drive) <= tau:
        return theta_prev
    s = math.copysign(1.0, drive)
    lo, hi = (theta_prev, math.pi / 4) if s > 0 else (0.0, theta_prev)
    g = lambda th: net(th) - s * tau  # noqa: E731
    glo = g(lo)
    while hi - lo > 1e-7:
        mid = 0.5 * (lo + hi)
        if (g(mid) > 0) == (glo > 0):
            lo, glo = mid, g(mid)
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---- bending by brute-force energy search

def grid_search_angle(c, mask, strain, step=1e-5, span=0.5):
    k = sa.column_stiffness(c, mask)
    x = c.column_offsets()
    d = strain * c.column_rest_length
    phi = np.arange(-span, span + step / 2, step)
    ext = d + np.outer(phi, x)
    energy = 0.5 * (ext * ext) @ k
    i = int(np.argmin(energy))
    return phi[i], energy[i]


# ---- addressing by enumeration of every energization

def subsets(n):
    return [frozenset(c) for r in range(n + 1) for c in itertools.combinations(range(n), r)]


def reachable_patterns(shape):
    return {ad.verify_plan(r, c, shape).tobytes() for r in subsets(shape[0]) for c in subsets(shape[1])}
