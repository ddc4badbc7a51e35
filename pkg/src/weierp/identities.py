"""Algebraic identities of wp as executable verifiers and rational maps.

The function field of a lattice is generated by (wp, wp') subject to the
single relation Y^2 = F(X) = 4X^3 - g2 X - g3, so every map here is a
bivariate rational function reduced to Y-degree at most one.  Polynomials are
dense ascending complex coefficient arrays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateAddition, HalfPeriodSingularity, RootFindingFailure
from .lattice import Invariants, Lattice, ensure_reduced, invariants_qseries
from .wp import wp_eval, wp_prime_eval

DEGREE_CAP = 160
MAX_MULTIPLIER = 12

ADDITION_TOL = 1e-12
WP_PRIME_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# Dense polynomial helpers (ascending coefficients)
# ---------------------------------------------------------------------------


def _trim(p: np.ndarray) -> np.ndarray:
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    nz = np.nonzero(p)[0]
    if len(nz) == 0:
        return np.zeros(1, dtype=complex)
    return p[: nz[-1] + 1]


def _padd(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    n = max(len(p), len(q))
    out = np.zeros(n, dtype=complex)
    out[: len(p)] += p
    out[: len(q)] += q
    return out


def _pmul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    out = np.convolve(p, q)
    if len(out) > DEGREE_CAP + 1:
        raise ValueError(f"polynomial degree {len(out) - 1} exceeds cap {DEGREE_CAP}")
    return out


def _peval(p: np.ndarray, x: complex) -> complex:
    acc = 0j
    for c in reversed(p):
        acc = acc * x + c
    return acc


def curve_polynomial(inv: Invariants) -> np.ndarray:
    """F(X) = 4X^3 - g2 X - g3."""
    return np.array([-inv.g3, -inv.g2, 0.0, 4.0], dtype=complex)


# ---------------------------------------------------------------------------
# Rational maps in (X, Y) modulo Y^2 = F(X)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalMap:
    """num/den with each part stored as even (X-only) plus Y * odd (X-only)."""

    invariants: Invariants
    num_even: np.ndarray
    num_odd: np.ndarray
    den_even: np.ndarray
    den_odd: np.ndarray

    @classmethod
    def from_x_rational(cls, inv: Invariants, num: np.ndarray, den: np.ndarray) -> RationalMap:
        zero = np.zeros(1, dtype=complex)
        return cls(inv, _trim(num), zero, _trim(den), zero.copy())

    @classmethod
    def from_y_grid(cls, inv: Invariants, num_grid, den_grid) -> RationalMap:
        """Build from coefficient grids grid[j][k] * Y^j X^k, folding Y^2 -> F."""
        ne, no = _fold_y(inv, num_grid)
        de, do = _fold_y(inv, den_grid)
        if not np.any(de) and not np.any(do):
            raise ValueError("denominator is identically zero")
        return cls(inv, ne, no, de, do)

    def reduce(self) -> RationalMap:
        """Reduction modulo the curve relation; a no-op on this representation."""
        return self

    def __call__(self, x: complex, y: complex = 0j) -> complex:
        num = _peval(self.num_even, x) + y * _peval(self.num_odd, x)
        den = _peval(self.den_even, x) + y * _peval(self.den_odd, x)
        return num / den

    def condition(self, x: complex) -> float:
        """Horner cancellation factor at x: term magnitude over value magnitude.

        Division-polynomial coefficients grow like powers of the invariants,
        so both parts of the map can lose up to log10(condition) digits when
        evaluated in binary64.  Callers that need guaranteed accuracy should
        reject points where condition * 1e-16 exceeds their tolerance.
        """
        worst = 1.0
        for p in (self.num_even, self.den_even):
            terms = float(np.sum(np.abs(p) * np.abs(x) ** np.arange(len(p))))
            value = abs(_peval(p, x))
            worst = max(worst, terms / max(value, 1e-300))
        return worst

    def is_x_only(self) -> bool:
        return not np.any(self.num_odd) and not np.any(self.den_odd)

    def to_text(self) -> str:
        def enc(p: np.ndarray):
            return [[c.real, c.imag] for c in p]

        payload = {
            "g2": [self.invariants.g2.real, self.invariants.g2.imag],
            "g3": [self.invariants.g3.real, self.invariants.g3.imag],
            "num_even": enc(self.num_even),
            "num_odd": enc(self.num_odd),
            "den_even": enc(self.den_even),
            "den_odd": enc(self.den_odd),
            "num_degree": len(_trim(self.num_even)) - 1,
            "den_degree": len(_trim(self.den_even)) - 1,
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_text(cls, text: str) -> RationalMap:
        d = json.loads(text)

        def dec(rows) -> np.ndarray:
            return np.array([complex(r, i) for r, i in rows], dtype=complex)

        inv = Invariants(complex(*d["g2"]), complex(*d["g3"]))
        return cls(inv, dec(d["num_even"]), dec(d["num_odd"]),
                   dec(d["den_even"]), dec(d["den_odd"]))


def _fold_y(inv: Invariants, grid) -> tuple[np.ndarray, np.ndarray]:
    rows = [np.atleast_1d(np.asarray(r, dtype=complex)) for r in grid]
    f = curve_polynomial(inv)
    even = np.zeros(1, dtype=complex)
    odd = np.zeros(1, dtype=complex)
    # Y^j = F^(j//2) * Y^(j%2)
    for j, row in enumerate(rows):
        reduced = row
        for _ in range(j // 2):
            reduced = _pmul(reduced, f)
        if j % 2 == 0:
            even = _padd(even, reduced)
        else:
            odd = _padd(odd, reduced)
    return _trim(even), _trim(odd)


# ---------------------------------------------------------------------------
# Pointwise identities
# ---------------------------------------------------------------------------


def addition_formula(pz: complex, pw: complex, ppz: complex, ppw: complex) -> complex:
    """wp(z+w) from the values (wp(z), wp(w), wp'(z), wp'(w)):

        wp(z+w) = ((wp'(z) - wp'(w)) / (wp(z) - wp(w)))^2 / 4 - wp(z) - wp(w).
    """
    denom = pz - pw
    # grouping keeps the result bit-for-bit symmetric under (z, w) swap
    if abs(denom) < ADDITION_TOL * (1.0 + (abs(pz) + abs(pw))):
        raise DegenerateAddition("wp(z) - wp(w) vanishes: z = +-w modulo the lattice")
    return 0.25 * ((ppz - ppw) / denom) ** 2 - (pz + pw)


def duplication(pz: complex, ppz: complex, ppz2: complex) -> complex:
    """wp(2z) = (wp''(z) / wp'(z))^2 / 4 - 2 wp(z)."""
    if abs(ppz) < WP_PRIME_FLOOR:
        raise HalfPeriodSingularity("wp'(z) vanishes: z is a half-period")
    return 0.25 * (ppz2 / ppz) ** 2 - 2.0 * pz


def diffeq_residual(z: complex, lat: Lattice) -> float:
    """|wp'^2 - (4 wp^3 - g2 wp - g3)| / (1 + |wp|^3) at z."""
    inv = invariants_qseries(ensure_reduced(lat))
    u = wp_eval(z, lat).value
    v = wp_prime_eval(z, lat).value
    return abs(v * v - (4.0 * u**3 - inv.g2 * u - inv.g3)) / (1.0 + abs(u) ** 3)


# ---------------------------------------------------------------------------
# Division polynomials and multiplication maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DivisionPolynomialSet:
    """psi_1..psi_N for the curve Y^2 = F(X), with 2-isogeny bookkeeping.

    psi_n = polys[n] * (2y)^(1 if n even else 0) where y = Y/2 satisfies
    y^2 = f(x) = x^3 + A x + B with A = -g2/4, B = -g3/4.  Stored are the
    x-polynomials; has_y[n] records the parity factor.
    """

    invariants: Invariants
    polys: tuple[np.ndarray, ...]
    has_y: tuple[bool, ...]

    def scalar(self, n: int, x: complex, y: complex) -> complex:
        """Numeric psi_n(x, y) with y = wp'/2."""
        val = _peval(self.polys[n], x)
        return val * 2.0 * y if self.has_y[n] else val


def division_polynomials(inv: Invariants, n_max: int) -> DivisionPolynomialSet:
    """Division polynomials via the doubling recurrences.

    Base cases (short form, A = -g2/4, B = -g3/4):
        P1 = 1,  P2 = 1 (psi_2 = 2y),
        P3 = 3x^4 + 6Ax^2 + 12Bx - A^2,
        P4 = 2(x^6 + 5Ax^4 + 20Bx^3 - 5A^2x^2 - 4ABx - 8B^2 - A^3),
    then with f = x^3 + Ax + B,
        P(2m)   = P(m) (P(m+2) P(m-1)^2 - P(m-2) P(m+1)^2),
        P(2m+1) = 16 f^2 P(m+2) P(m)^3 - P(m-1) P(m+1)^3    (m even),
        P(2m+1) = P(m+2) P(m)^3 - 16 f^2 P(m-1) P(m+1)^3    (m odd).
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    a = -inv.g2 / 4.0
    b = -inv.g3 / 4.0
    f = np.array([b, a, 0.0, 1.0], dtype=complex)
    f2_16 = 16.0 * _pmul(f, f)
    polys: list[np.ndarray] = [
        np.zeros(1, dtype=complex),
        np.ones(1, dtype=complex),
        np.ones(1, dtype=complex),
        np.array([-a * a, 12.0 * b, 6.0 * a, 0.0, 3.0], dtype=complex),
        2.0 * np.array(
            [-8.0 * b * b - a**3, -4.0 * a * b, -5.0 * a * a, 20.0 * b, 5.0 * a, 0.0, 1.0],
            dtype=complex,
        ),
    ]
    for n in range(5, n_max + 1):
        if n % 2 == 1:
            m = (n - 1) // 2
            t1 = _pmul(polys[m + 2], _pmul(polys[m], _pmul(polys[m], polys[m])))
            t2 = _pmul(polys[m - 1], _pmul(polys[m + 1], _pmul(polys[m + 1], polys[m + 1])))
            if m % 2 == 0:
                p = _padd(_pmul(f2_16, t1), -t2)
            else:
                p = _padd(t1, -_pmul(f2_16, t2))
        else:
            m = n // 2
            d = _padd(
                _pmul(polys[m + 2], _pmul(polys[m - 1], polys[m - 1])),
                -_pmul(polys[m - 2], _pmul(polys[m + 1], polys[m + 1])),
            )
            p = _pmul(polys[m], d)
        polys.append(_trim(p))
    has_y = tuple(n >= 2 and n % 2 == 0 for n in range(n_max + 1))
    return DivisionPolynomialSet(inv, tuple(_trim(p) for p in polys[: n_max + 1]), has_y)


def multiplication_by_n(n: int, inv: Invariants) -> RationalMap:
    """The rational map with wp(nz) = map(wp(z)); X-only after curve reduction.

    wp(nz) = X - psi_(n-1) psi_(n+1) / psi_n^2.  The parity factors pair up so
    both numerator and denominator are X-polynomials; the numerator has degree
    exactly n^2.
    """
    if not 2 <= n <= MAX_MULTIPLIER:
        raise ValueError(f"n must be in [2, {MAX_MULTIPLIER}]")
    dps = division_polynomials(inv, n + 1)
    f4 = 4.0 * np.array([-inv.g3 / 4.0, -inv.g2 / 4.0, 0.0, 1.0], dtype=complex)  # = F(X)
    pn2 = _pmul(dps.polys[n], dps.polys[n])
    cross = _pmul(dps.polys[n - 1], dps.polys[n + 1])
    if n % 2 == 1:
        den = pn2
        num = _padd(np.concatenate(([0j], pn2)), -_pmul(f4, cross))
    else:
        den = _pmul(f4, pn2)
        num = _padd(np.concatenate(([0j], den)), -cross)
    return RationalMap.from_x_rational(inv, num, den)


def duplication_rational_map(inv: Invariants) -> RationalMap:
    """The doubling identity written as a rational function of X alone:

        wp(2z) = (X^4 + (g2/2) X^2 + 2 g3 X + g2^2/16) / F(X),

    obtained by substituting wp''^2 = (6X^2 - g2/2)^2 and wp'^2 = F(X).
    """
    g2, g3 = inv.g2, inv.g3
    num = np.array([g2 * g2 / 16.0, 2.0 * g3, g2 / 2.0, 0.0, 1.0], dtype=complex)
    return RationalMap.from_x_rational(inv, num, curve_polynomial(inv))


def division_values(n: int, target: complex, inv: Invariants) -> np.ndarray:
    """All n^2 candidate values of wp(z/n) given target = wp(z).

    Roots of num(X) - target * den(X) for the multiplication-by-n map; the
    full fiber is returned and the caller picks the relevant root.  Roots come
    from companion-matrix eigenvalues with one Newton polish pass.
    """
    if not 2 <= n <= 6:
        raise ValueError("n must be in [2, 6]")
    mp = multiplication_by_n(n, inv)
    poly = _padd(mp.num_even, -target * np.asarray(mp.den_even))
    poly = _trim(poly)
    if len(poly) != n * n + 1:
        raise RootFindingFailure("fiber polynomial has unexpected degree")
    roots = np.roots(poly[::-1])
    if not np.all(np.isfinite(roots)):
        raise RootFindingFailure("non-finite roots from the companion matrix")
    deriv = poly[1:] * np.arange(1, len(poly))
    for _ in range(2):
        pv = np.array([_peval(poly, r) for r in roots])
        dv = np.array([_peval(deriv, r) for r in roots])
        safe = np.abs(dv) > 1e-14
        roots = np.where(safe, roots - pv / np.where(safe, dv, 1.0), roots)
    if not np.all(np.isfinite(roots)):
        raise RootFindingFailure("Newton polish diverged")
    return roots
