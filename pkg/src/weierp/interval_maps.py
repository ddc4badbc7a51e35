"""Algebraic bijections between a bounded open interval and the real line,
plus the chain-rule factorization harness for implicitly defined systems.

For the interval (a, b) with midpoint m and radius r the forward map is

    to_line(t) = (t - m) / (r^2 - (t - m)^2),

a bijection onto the reals whose derivative never vanishes.  Its inverse and
two companion quantities have the closed forms implemented below; the inverse
is computed cancellation-free so it stays accurate for small arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class IntervalBijection:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("need a < b")

    @property
    def m(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def r(self) -> float:
        return 0.5 * (self.b - self.a)


def to_line(ib: IntervalBijection, t: float) -> float:
    """(t - m) / (r^2 - (t - m)^2), mapping (a, b) onto the line."""
    if not ib.a < t < ib.b:
        raise DomainError(f"t = {t} outside ({ib.a}, {ib.b})")
    s = t - ib.m
    return s / ((ib.r - s) * (ib.r + s))


def to_line_deriv(ib: IntervalBijection, t: float) -> float:
    """(r^2 + s^2) / (r^2 - s^2)^2 with s = t - m; strictly positive."""
    if not ib.a < t < ib.b:
        raise DomainError(f"t = {t} outside ({ib.a}, {ib.b})")
    s = t - ib.m
    d = (ib.r - s) * (ib.r + s)
    return (ib.r * ib.r + s * s) / (d * d)


def _offset(ib: IntervalBijection, u: float) -> float:
    """The root s in (-r, r) of u s^2 + s - u r^2 = 0, cancellation-free."""
    r = ib.r
    return 2.0 * u * r * r / (1.0 + math.sqrt(1.0 + 4.0 * u * u * r * r))


def from_line(ib: IntervalBijection, u: float) -> float:
    """Inverse of to_line; total on the reals, from_line(0) = m."""
    return ib.m + _offset(ib, u)


def from_line_deriv(ib: IntervalBijection, u: float) -> float:
    """(r^2 - s^2)^2 / (r^2 + s^2) at s = from_line(u) - m; strictly positive."""
    s = _offset(ib, u)
    d = (ib.r - s) * (ib.r + s)
    return d * d / (ib.r * ib.r + s * s)


def from_line_aux(ib: IntervalBijection, u: float) -> float:
    """1 / (r^2 + s^2) at s = from_line(u) - m; ranges over (1/(2r^2), 1/r^2]."""
    s = _offset(ib, u)
    return 1.0 / (ib.r * ib.r + s * s)


# ---------------------------------------------------------------------------
# Chain-rule factorization harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainRuleInstance:
    """Partial-derivative data of an implicit system of n equations.

    The system F_i(x_1..x_{n+1}) is an outer function P_i of the 2n+2 values
    (x_1..x_{n+1}, g(x_1)..g(x_{n+1})) where g is a fixed smooth inner map.
    outer_partials holds dP_i/dy_j for the 2n+1 columns j = 2..2n+2;
    inner_derivs holds g'(x_j) for j = 2..n+1.
    """

    n: int
    outer_partials: np.ndarray   # n x (2n+1)
    inner_derivs: np.ndarray     # n

    def __post_init__(self):
        p = np.asarray(self.outer_partials, dtype=float)
        d = np.asarray(self.inner_derivs, dtype=float)
        if p.shape != (self.n, 2 * self.n + 1):
            raise ValueError(f"outer_partials must be {self.n} x {2*self.n+1}")
        if d.shape != (self.n,):
            raise ValueError(f"inner_derivs must have length {self.n}")


@dataclass(frozen=True)
class ChainRuleReport:
    residual: float
    outer_rank: int
    system_nonsingular: bool
    implication_holds: bool


def build_chain_matrix(inst: ChainRuleInstance) -> np.ndarray:
    """The (2n+1) x n block matrix [identity; zero row; diag(inner_derivs)].

    Multiplying the outer partials by this matrix applies the chain rule
    dF_i/dx_j = dP_i/dy_j + g'(x_j) dP_i/dy_{j+n+1} for j = 2..n+1; the zero
    row sits at the column of g(x_1), which none of x_2..x_{n+1} touches.
    """
    n = inst.n
    m = np.zeros((2 * n + 1, n))
    m[:n, :] = np.eye(n)
    m[n + 1 :, :] = np.diag(np.asarray(inst.inner_derivs, dtype=float))
    return m


def chain_rule_check(
    inst: ChainRuleInstance, system_partials: np.ndarray, tol: float = 1e-9
) -> ChainRuleReport:
    """Verify system_partials = outer_partials @ chain matrix and the rank link.

    Reports the max-norm factorization residual, the rank of the outer
    partials (singular values below tol * largest count as zero), whether the
    n x n system matrix is nonsingular at the same threshold, and whether the
    implication "system nonsingular => outer partials have full rank n" holds
    for this instance.
    """
    f = np.asarray(system_partials, dtype=float)
    n = inst.n
    if f.shape != (n, n):
        raise ValueError(f"system_partials must be {n} x {n}")
    p = np.asarray(inst.outer_partials, dtype=float)
    residual = float(np.max(np.abs(f - p @ build_chain_matrix(inst))))
    sv = np.linalg.svd(p, compute_uv=False)
    rank = int(np.sum(sv > tol * max(sv[0], 1e-300)))
    fsv = np.linalg.svd(f, compute_uv=False)
    nonsingular = bool(fsv[-1] > tol * max(fsv[0], 1e-300))
    implication = (not nonsingular) or rank == n
    return ChainRuleReport(residual, rank, nonsingular, implication)
