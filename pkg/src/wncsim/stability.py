"""Rightmost characteristic roots and critical delay of the speed loop.

The closed loop without a predictor reduces to a scalar second-order delay
differential equation with characteristic function

    d(s) = s^2 + a1 s + a0 + (b1 s + b0) e^{-delay * s}.

Roots are approximated by Chebyshev collocation of the solution segment on
[-delay, 0] (the segment derivative matrix with the dynamics imposed at the
right endpoint), then Newton-polished on d(s) itself. Only roots whose
polished residual certifies them are reported, so every reported root is a
root of d, not an artifact of the discretization. An independent
imaginary-axis crossing computation provides the oracle for the critical
delay; the delay-free case degenerates to a plain quadratic and is solved
directly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .control import KI, KP

MOTOR_GAIN = 4.159
MOTOR_POLE = 3.888

_POLISH_TOL = 1e-10
_DEDUPE_TOL = 1e-6


@dataclass(frozen=True)
class ScalarDde:
    """d(s) = s^2 + a1 s + a0 + (b1 s + b0) e^{-delay s}, monic."""

    nondelayed: tuple  # (1, a1, a0)
    delayed: tuple     # (b1, b0)
    delay: float

    def __post_init__(self):
        if len(self.nondelayed) != 3 or self.nondelayed[0] != 1:
            raise ValueError("nondelayed part must be (1, a1, a0)")
        if len(self.delayed) != 2:
            raise ValueError("delayed part must be (b1, b0)")
        if self.delay < 0:
            raise ValueError("delay must be nonnegative")

    @property
    def a1(self):
        return self.nondelayed[1]

    @property
    def a0(self):
        return self.nondelayed[2]

    @property
    def b1(self):
        return self.delayed[0]

    @property
    def b0(self):
        return self.delayed[1]


@dataclass
class SpectrumResult:
    order: int
    roots: list       # complex, sorted by real part descending
    residuals: list   # |d(s_k)| per root


def speed_loop_dde(delay):
    """Motor speed loop under PI control with loop delay; exact gain products."""
    return ScalarDde(
        nondelayed=(1.0, MOTOR_POLE, 0.0),
        delayed=(KP * MOTOR_GAIN, KI * MOTOR_GAIN),
        delay=delay,
    )


def char_fn(dde, s):
    return (s * s + dde.a1 * s + dde.a0
            + (dde.b1 * s + dde.b0) * cmath.exp(-dde.delay * s))


def char_fn_prime(dde, s):
    expo = cmath.exp(-dde.delay * s)
    return (2 * s + dde.a1
            + (dde.b1 - dde.delay * (dde.b1 * s + dde.b0)) * expo)


def _cheb_diff(n):
    """Chebyshev differentiation matrix and nodes x_j = cos(j pi / n)."""
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n + 1)
    dx = x[:, None] - x[None, :]
    d = np.outer(c, 1.0 / c) / (dx + np.eye(n + 1))
    d -= np.diag(d.sum(axis=1))
    return d, x


def _collocation_eigenvalues(dde, n):
    # segment [-delay, 0] mapped from [-1, 1]; derivative picks up 2/delay
    d, _ = _cheb_diff(n)
    big = np.kron(d * (2.0 / dde.delay), np.eye(2))
    a_mat = np.array([[0.0, 1.0], [-dde.a0, -dde.a1]])
    b_mat = np.array([[0.0, 0.0], [-dde.b0, -dde.b1]])
    big[0:2, :] = 0.0
    big[0:2, 0:2] = a_mat
    big[0:2, -2:] = b_mat
    return np.linalg.eigvals(big)


def _polish(dde, start, max_iter=60):
    s = complex(start)
    for _ in range(max_iter):
        value = char_fn(dde, s)
        if abs(value) < _POLISH_TOL:
            return s
        slope = char_fn_prime(dde, s)
        if slope == 0:
            return None
        step = value / slope
        s -= step
        if not (math.isfinite(s.real) and math.isfinite(s.imag)):
            return None
    return s if abs(char_fn(dde, s)) < _POLISH_TOL else None


def _sorted_with_residuals(dde, roots):
    roots = sorted(roots, key=lambda s: (-s.real, -s.imag))
    residuals = [abs(char_fn(dde, s)) for s in roots]
    return roots, residuals


def characteristic_roots(dde, n_nodes=32):
    """Certified roots of d(s), rightmost first.

    Every collocation eigenvalue with nonnegative imaginary part is polished
    by Newton iteration until |d| < 1e-10; converged values are deduplicated
    and mirrored into conjugate pairs, so the reported set is closed under
    conjugation and every entry carries a certified residual. Eigenvalues
    whose polish does not converge (spurious discretization roots) are
    dropped rather than reported.
    """
    if n_nodes < 8:
        raise ValueError("need at least 8 collocation nodes")
    if dde.delay == 0:
        poly_roots = np.roots([1.0, dde.a1 + dde.b1, dde.a0 + dde.b0])
        roots, residuals = _sorted_with_residuals(
            dde, [complex(r) for r in poly_roots])
        return SpectrumResult(order=n_nodes, roots=roots, residuals=residuals)

    found = []
    for eig in _collocation_eigenvalues(dde, n_nodes):
        if eig.imag < 0:
            continue
        root = _polish(dde, eig)
        if root is None:
            continue
        if root.imag < 0:
            root = root.conjugate()
        tol = _DEDUPE_TOL * (1.0 + abs(root))
        if any(abs(root - kept) < tol for kept in found):
            continue
        found.append(root)
    if not found:
        raise RuntimeError(
            "no collocation eigenvalue converged under polish; "
            "increase n_nodes")
    closed = []
    for root in found:
        if abs(root.imag) <= _DEDUPE_TOL * (1.0 + abs(root)):
            closed.append(complex(root.real, 0.0))
        else:
            closed.append(root)
            closed.append(root.conjugate())
    roots, residuals = _sorted_with_residuals(dde, closed)
    return SpectrumResult(order=n_nodes, roots=roots, residuals=residuals)


def rightmost(dde, start_nodes=32, tol=1e-4, max_nodes=512):
    """Rightmost root, with the node count doubled until it stops moving."""
    prev = characteristic_roots(dde, start_nodes).roots[0]
    n = start_nodes * 2
    while n <= max_nodes:
        cur = characteristic_roots(dde, n).roots[0]
        if abs(cur - prev) < tol:
            return cur
        prev = cur
        n *= 2
    raise RuntimeError("rightmost root did not converge under node doubling")


def critical_delay(template, t_lo=0.1, t_hi=0.8, tol=1e-4):
    """Bisection on the sign of the rightmost real part over [t_lo, t_hi]."""
    if not 0 < t_lo < t_hi:
        raise ValueError("need 0 < t_lo < t_hi")

    def sign_at(delay):
        return rightmost(replace(template, delay=delay)).real

    lo_val = sign_at(t_lo)
    hi_val = sign_at(t_hi)
    if lo_val == 0.0:
        return t_lo
    if hi_val == 0.0:
        return t_hi
    if (lo_val > 0) == (hi_val > 0):
        raise ValueError(
            "rightmost real part does not change sign over the range")
    lo, hi = t_lo, t_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        mid_val = sign_at(mid)
        if mid_val == 0.0:
            return mid
        if (mid_val > 0) == (hi_val > 0):
            hi, hi_val = mid, mid_val
        else:
            lo, lo_val = mid, mid_val
    return 0.5 * (lo + hi)


def crossing_oracle(template):
    """Imaginary-axis crossing (omega_c, t_crit) from the magnitude/phase
    conditions, independent of any spectral discretization.

    |b1 j w + b0| = |-w^2 + a0 + a1 j w| gives a quadratic in w^2; the
    smallest positive delay putting a root at j omega_c follows from the
    phase balance.
    """
    a1, a0 = template.a1, template.a0
    b1, b0 = template.b1, template.b0
    # w^4 + (a1^2 - 2 a0 - b1^2) w^2 + (a0^2 - b0^2) = 0
    p = a1 * a1 - 2.0 * a0 - b1 * b1
    q = a0 * a0 - b0 * b0
    disc = p * p - 4.0 * q
    if disc < 0:
        raise ValueError("no imaginary-axis crossing: complex w^2 roots")
    w_sq = max((-p + math.sqrt(disc)) / 2.0, (-p - math.sqrt(disc)) / 2.0)
    if w_sq <= 0:
        raise ValueError("no imaginary-axis crossing: no positive w^2 root")
    omega = math.sqrt(w_sq)
    phase = (math.pi
             + cmath.phase(complex(b0, b1 * omega))
             - cmath.phase(complex(a0 - w_sq, a1 * omega)))
    t_crit = (phase % (2.0 * math.pi)) / omega
    return omega, t_crit


def sweep_rightmost(template, t_lo, t_hi, steps):
    """(delay, rightmost real part) pairs over an inclusive delay grid."""
    if steps < 2:
        raise ValueError("need at least 2 sweep points")
    if not 0 < t_lo < t_hi:
        raise ValueError("need 0 < t_lo < t_hi")
    pairs = []
    for k in range(steps):
        delay = t_lo + (t_hi - t_lo) * k / (steps - 1)
        pairs.append((delay, rightmost(replace(template, delay=delay)).real))
    return pairs
