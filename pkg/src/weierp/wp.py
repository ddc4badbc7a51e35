"""Evaluation of the Weierstrass function wp, its derivatives, and a direct
summation oracle from the defining series

    wp(z) = 1/z^2 + sum over nonzero lattice points w of (1/(z-w)^2 - 1/w^2).

The fast path reduces the argument to the Voronoi cell of the origin, halves
it into the convergence disc of the Laurent expansion about 0, sums the
series, and undoes the halvings with the duplication law carrying the pair
(wp, wp') jointly so no square-root branch is ever taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HalfPeriodSingularity, PoleError
from .lattice import (
    Invariants,
    Lattice,
    disc_points,
    ensure_reduced,
    invariants_qseries,
    shell_scale,
    shortest_vector,
)

POLE_REL_TOL = 1e-12
SERIES_LENGTH = 40            # Laurent coefficients c_2..c_40
# Halve until |z| < 0.55 * shortest vector.  The series tail is still ~0.3^40
# there, and every extra halving costs a duplication step whose cancellation
# noise limits end-to-end accuracy.  Nearest-point reduction keeps every
# duplication argument >= 0.275 * lambda away from the zeros of wp': a point
# of the Voronoi cell of 0 is closer to 0 than to any other lattice point, so
# |z0/2^j - h| >= |z0|/2^j for every half-period h.
REDUCTION_TARGET = 0.55
WP_PRIME_FLOOR = 1e-12        # |wp'| below this aborts a duplication step


@dataclass(frozen=True)
class EvalResult:
    value: complex
    err_estimate: float


@dataclass(frozen=True)
class LaurentCoefficients:
    """Coefficients c_k of wp(z) = 1/z^2 + sum_{k>=2} c_k z^(2k-2)."""

    invariants: Invariants
    coeffs: tuple[complex, ...]  # c_2, c_3, ..., c_count

    def wp(self, z: complex) -> complex:
        z2 = z * z
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z2 + c
        return 1.0 / z2 + acc * z2

    def wp_prime(self, z: complex) -> complex:
        z2 = z * z
        acc = 0j
        for k in range(len(self.coeffs) - 1, -1, -1):
            acc = acc * z2 + (2 * (k + 2) - 2) * self.coeffs[k]
        return -2.0 / (z2 * z) + acc * z


_LAURENT_CACHE: dict[tuple[complex, complex, int], LaurentCoefficients] = {}


def laurent_coefficients(inv: Invariants, count: int) -> LaurentCoefficients:
    """Coefficients c_2..c_count via c_2 = g2/20, c_3 = g3/28 and the recurrence

        c_k = 3 / ((2k+1)(k-3)) * sum_{m=2}^{k-2} c_m c_{k-m}   for k >= 4,

    which follows from plugging the expansion into the differential identity.
    """
    if count < 2:
        raise ValueError("count must be >= 2")
    key = (inv.g2, inv.g3, count)
    cached = _LAURENT_CACHE.get(key)
    if cached is not None:
        return cached
    c: list[complex] = [inv.g2 / 20.0, inv.g3 / 28.0]
    for k in range(4, count + 1):
        s = 0j
        for m in range(2, k - 1):
            s += c[m - 2] * c[k - m - 2]
        c.append(3.0 * s / ((2 * k + 1) * (k - 3)))
    out = LaurentCoefficients(inv, tuple(c))
    _LAURENT_CACHE[key] = out
    return out


# ---------------------------------------------------------------------------
# Argument reduction
# ---------------------------------------------------------------------------


def _nearest_reduction(z: complex, lat: Lattice) -> tuple[complex, float]:
    """(z - nearest lattice point, distance to it); basis assumed reduced."""
    x, y = lat.coords(z)
    m0, n0 = round(x), round(y)
    best = None
    best_d = math.inf
    for dm in (-1, 0, 1):
        for dn in (-1, 0, 1):
            w = lat.point(m0 + dm, n0 + dn)
            d = abs(z - w)
            if d < best_d:
                best_d = d
                best = z - w
    return best, best_d


def pole_distance(z: complex, lat: Lattice) -> float:
    """Euclidean distance from z to the nearest lattice point."""
    return _nearest_reduction(complex(z), ensure_reduced(lat))[1]


# ---------------------------------------------------------------------------
# Direct summation oracle
# ---------------------------------------------------------------------------

_TAIL_CACHE: dict[tuple[complex, complex, int], tuple[complex, complex, np.ndarray, float]] = {}


def _oracle_setup(lat: Lattice, radius: int):
    """Per-(lattice, radius) data: exterior sums S4, S6, point cloud, cutoff."""
    key = (lat.omega1, lat.omega2, radius)
    cached = _TAIL_CACHE.get(key)
    if cached is not None:
        return cached
    pts = disc_points(lat, radius)
    inv = invariants_qseries(lat)
    s4 = inv.g2 / 60.0 - np.sum(pts**-4.0)
    s6 = inv.g3 / 140.0 - np.sum(pts**-6.0)
    cut = radius * shell_scale(lat)
    out = (complex(s4), complex(s6), pts, cut)
    _TAIL_CACHE[key] = out
    return out


def wp_direct_sum(z: complex, lat: Lattice, radius: int) -> EvalResult:
    """Reference evaluation by summing the defining series over a disc.

    The summand decays only like |w|^-3, so the bare truncated sum carries an
    O(1/radius) style tail.  Expanding that tail in powers of z gives

        sum_{|w| > cut} (1/(z-w)^2 - 1/w^2) = 3 z^2 S4 + 5 z^4 S6 + O(z^6 / cut^6)

    with S_m the exterior lattice sums, which are known exactly from the
    invariants minus the interior partial sums.  Adding the two leading terms
    leaves a remainder far below every tolerance used against this oracle.
    """
    if radius < 10:
        raise ValueError("radius must be >= 10")
    z = complex(z)
    lat = ensure_reduced(lat)
    if pole_distance(z, lat) <= POLE_REL_TOL * abs(lat.omega1):
        raise PoleError(f"z = {z!r} is a lattice point")
    s4, s6, pts, cut = _oracle_setup(lat, radius)
    total = 1.0 / (z * z) + np.sum(1.0 / (z - pts) ** 2 - 1.0 / pts**2)
    err = 2.0 * math.pi * abs(z) / cut  # bare-series tail bound, O(1/radius)
    if abs(z) < 0.25 * cut:
        total += 3.0 * z**2 * s4 + 5.0 * z**4 * s6
        err = 8.0 * (7.0 * abs(z) ** 6 / cut**6 + 1e-14 * abs(total))
    return EvalResult(complex(total), err)


# ---------------------------------------------------------------------------
# Laurent series + duplication evaluation
# ---------------------------------------------------------------------------


_EPS = 2.220446049250313e-16


def _series_pair_with_bounds(lc: LaurentCoefficients, w: complex):
    """(wp, wp', du, dv) at w: values plus absolute roundoff/truncation bounds.

    The bounds run a second Horner pass over term magnitudes; truncation adds
    the geometric tail of the last retained term.
    """
    u = lc.wp(w)
    v = lc.wp_prime(w)
    aw2 = abs(w) * abs(w)
    mag_u = 0.0
    mag_v = 0.0
    for kk in range(len(lc.coeffs) - 1, -1, -1):
        c = abs(lc.coeffs[kk])
        mag_u = mag_u * aw2 + c
        mag_v = mag_v * aw2 + (2 * (kk + 2) - 2) * c
    mag_u = mag_u * aw2 + 1.0 / aw2
    mag_v = mag_v * aw2 / abs(w) + 2.0 / (aw2 * abs(w))
    # Horner roundoff grows far slower than the worst-case op count; a small
    # constant times the term-magnitude sum tracks the observed noise
    tail_ratio = aw2 * abs(lc.coeffs[-1] / lc.coeffs[-2]) if len(lc.coeffs) > 1 else 0.0
    tail_ratio = min(tail_ratio, 0.9)
    tail_u = abs(lc.coeffs[-1]) * abs(w) ** (2 * len(lc.coeffs) + 2) / (1.0 - tail_ratio)
    du = 4.0 * _EPS * mag_u + tail_u
    dv = 4.0 * _EPS * mag_v + tail_u * (2 * len(lc.coeffs) + 2) / abs(w)
    return u, v, du, dv


def _duplication_step(u, v, g2, du, dv):
    """(wp, wp') at 2z from the pair at z, with propagated error bounds.

    Uses wp(2z) = (wp'')^2 / (4 wp'^2) - 2 wp and its derivative, taking
    wp'' = 6 wp^2 - g2/2 and wp''' = 12 wp wp'.  The bound propagation is
    first order with an extra roundoff term per expression; it tracks the
    cancellation blow-up near arguments where wp'' or wp' get small, which is
    what actually limits accuracy on tall lattices.
    """
    if abs(v) < WP_PRIME_FLOOR:
        raise HalfPeriodSingularity("wp' vanished inside a duplication step")
    w2 = 6.0 * u * u - g2 / 2.0
    dw2 = 12.0 * abs(u) * du + 4.0 * _EPS * (6.0 * abs(u) ** 2 + abs(g2) / 2.0)
    t = w2 / v
    dt = (dw2 + abs(t) * dv) / abs(v) + _EPS * abs(t)
    u2 = t * t / 4.0 - 2.0 * u
    du2 = 0.5 * abs(t) * dt + 2.0 * du + 4.0 * _EPS * (0.25 * abs(t) ** 2 + 2.0 * abs(u))
    p = 12.0 * u * v * v - w2 * w2
    dp = (
        12.0 * (abs(v) ** 2 * du + 2.0 * abs(u * v) * dv)
        + 2.0 * abs(w2) * dw2
        + 4.0 * _EPS * (12.0 * abs(u) * abs(v) ** 2 + abs(w2) ** 2)
    )
    q = w2 * p / (4.0 * v**3)
    v2 = q - v
    dq = (
        abs(p / (4.0 * v**3)) * dw2
        + abs(w2 / (4.0 * v**3)) * dp
        + 3.0 * abs(q / v) * dv
        + 4.0 * _EPS * abs(q)
    )
    dv2 = dq + dv
    return u2, v2, du2, dv2


def _wp_pair(z: complex, lat: Lattice) -> tuple[complex, complex, float, float]:
    z = complex(z)
    lat = ensure_reduced(lat)
    lam = shortest_vector(lat)
    z0, dist = _nearest_reduction(z, lat)
    if dist <= POLE_REL_TOL * abs(lat.omega1):
        raise PoleError(f"z = {z!r} is within pole tolerance of the lattice")
    inv = invariants_qseries(lat)
    lc = laurent_coefficients(inv, SERIES_LENGTH)

    halvings = 0
    while abs(z0) / (1 << halvings) >= REDUCTION_TARGET * lam:
        halvings += 1

    for extra in (0, 1):
        k = halvings + extra
        w = z0 / (1 << k)
        u, v, du, dv = _series_pair_with_bounds(lc, w)
        try:
            for _ in range(k):
                u, v, du, dv = _duplication_step(u, v, inv.g2, du, dv)
        except HalfPeriodSingularity:
            if extra == 0:
                continue
            raise
        return u, v, du, dv
    raise HalfPeriodSingularity("duplication failed at both halving depths")


def wp_eval(z: complex, lat: Lattice, tol: float = 1e-12) -> EvalResult:
    """wp(z) by argument reduction, Laurent series, and duplication.

    tol is the caller's accuracy target; evaluation always runs at full
    precision, so the reported err_estimate is what actually matters.
    """
    u, _, du, _ = _wp_pair(z, lat)
    return EvalResult(u, du)


def wp_prime_eval(z: complex, lat: Lattice, tol: float = 1e-12) -> EvalResult:
    """wp'(z); the pair (wp, wp') is propagated through each doubling step."""
    _, v, _, dv = _wp_pair(z, lat)
    return EvalResult(v, dv)


def wp_second_eval(z: complex, lat: Lattice, tol: float = 1e-12) -> EvalResult:
    """wp''(z) = 6 wp(z)^2 - g2/2."""
    u, _, du, _ = _wp_pair(z, lat)
    g2 = invariants_qseries(ensure_reduced(lat)).g2
    value = 6.0 * u * u - g2 / 2.0
    return EvalResult(value, 12.0 * abs(u) * du + 4.0 * _EPS * (6.0 * abs(u) ** 2 + abs(g2) / 2.0))
