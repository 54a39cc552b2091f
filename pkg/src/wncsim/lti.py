"""Rational transfer functions and discretization routes.

Everything downstream (delay approximants, predictor synthesis, the
closed-loop harness) is built on a small transfer-function type with
three discretization routes:

* forward Euler      s -> (z - 1)/T
* zero-order hold    exact, restricted to first-order k/(s + a)
* bilinear (Tustin)  s -> (2/T)(z - 1)/(z + 1)

Discrete forms are always normalized to a monic denominator.
Coefficient arrays are in descending powers.
"""

from __future__ import annotations

import math

import numpy as np


class PoleEvaluationError(ZeroDivisionError):
    """Transfer function evaluated exactly at a pole."""


class TransferFunction:
    """Proper rational transfer function in s or z.

    num, den: coefficient sequences, descending powers.
    domain:   "s" (continuous) or "z" (discrete).
    period:   sample period T, required iff domain == "z".
    """

    def __init__(self, num, den, domain="s", period=None):
        num = np.atleast_1d(np.asarray(num, dtype=float))
        den = np.atleast_1d(np.asarray(den, dtype=float))
        den = _trim(den)
        num = _trim(num)
        if den.size == 0 or den[0] == 0.0:
            raise ValueError("denominator leading coefficient must be nonzero")
        if num.size > den.size:
            raise ValueError("improper transfer function (numerator degree exceeds denominator)")
        if domain not in ("s", "z"):
            raise ValueError(f"unknown domain {domain!r}")
        if domain == "z":
            if period is None or period <= 0:
                raise ValueError("discrete transfer function requires period > 0")
            # monic denominator is the normal form in z
            num = num / den[0]
            den = den / den[0]
        elif period is not None:
            raise ValueError("period is only meaningful for domain 'z'")
        self.num = num
        self.den = den
        self.domain = domain
        self.period = period

    @property
    def order(self):
        return self.den.size - 1

    def at(self, point):
        """Evaluate at a complex point; raises PoleEvaluationError on a pole."""
        dv = np.polyval(self.den, point)
        if dv == 0:
            raise PoleEvaluationError(f"evaluation at a pole: {point!r}")
        return complex(np.polyval(self.num, point)) / complex(dv)

    def __repr__(self):
        dom = self.domain if self.domain == "s" else f"z, T={self.period}"
        return f"TransferFunction({list(self.num)}, {list(self.den)}, {dom})"


def _trim(coeffs):
    """Drop leading (highest-power) zeros; keep a single 0 for the zero polynomial."""
    idx = np.flatnonzero(coeffs)
    if idx.size == 0:
        return np.zeros(1)
    return coeffs[idx[0]:]


def _shifted_power(a, b):
    """Coefficients of (z - 1)^a (z + 1)^b, descending powers."""
    poly = np.ones(1)
    for _ in range(a):
        poly = np.convolve(poly, [1.0, -1.0])
    for _ in range(b):
        poly = np.convolve(poly, [1.0, 1.0])
    return poly


def tf_eval(tf, point):
    return tf.at(point)


def discretize_forward_euler(tf, T):
    """Forward-Euler discretization: substitute s = (z - 1)/T.

    Both polynomials are scaled by T**n (n = denominator degree) so the
    substitution stays polynomial; the common factor cancels.
    """
    if tf.domain != "s":
        raise ValueError("discretization expects a continuous transfer function")
    if T <= 0:
        raise ValueError("sample period must be positive")
    n = tf.den.size - 1
    num = _sub_euler(tf.num, n, T)
    den = _sub_euler(tf.den, n, T)
    return TransferFunction(num, den, domain="z", period=T)


def _sub_euler(coeffs, n, T):
    d = coeffs.size - 1
    out = np.zeros(n + 1)
    for i, p in enumerate(coeffs):
        k = d - i                      # power of (z - 1)
        poly = p * T ** (n - k) * _shifted_power(k, 0)
        out[n - k:] += poly
    return out


def discretize_zoh(tf, T):
    """Exact step-invariant discretization of k/(s + a).

    Restricted to the strictly proper first-order case; a != 0 required.
    """
    if tf.domain != "s":
        raise ValueError("discretization expects a continuous transfer function")
    if T <= 0:
        raise ValueError("sample period must be positive")
    if tf.den.size != 2 or tf.num.size != 1:
        raise ValueError("zero-order-hold route implemented for first-order k/(s + a) only")
    k = tf.num[0] / tf.den[0]
    a = tf.den[1] / tf.den[0]
    if a == 0.0:
        raise ValueError("pole at the origin: ZOH form (k/a)(1 - e^{-aT}) undefined")
    pole = math.exp(-a * T)
    gain = (k / a) * (1.0 - pole)
    return TransferFunction([gain], [1.0, -pole], domain="z", period=T)


def discretize_bilinear(tf, T):
    """Bilinear (Tustin) transform: substitute s = (2/T)(z - 1)/(z + 1).

    num and den are both multiplied by (z + 1)^n, n = denominator degree,
    so relative degree is preserved as direct feedthrough in z.
    """
    if tf.domain != "s":
        raise ValueError("discretization expects a continuous transfer function")
    if T <= 0:
        raise ValueError("sample period must be positive")
    n = tf.den.size - 1
    num = _sub_bilinear(tf.num, n, T)
    den = _sub_bilinear(tf.den, n, T)
    return TransferFunction(num, den, domain="z", period=T)


def _sub_bilinear(coeffs, n, T):
    d = coeffs.size - 1
    out = np.zeros(n + 1)
    for i, p in enumerate(coeffs):
        k = d - i                      # power of (z - 1), carries (2/T)^k
        out += p * (2.0 / T) ** k * _shifted_power(k, n - k)
    return out


def multiply(g1, g2):
    """Product of two transfer functions in the same domain."""
    if g1.domain != g2.domain or g1.period != g2.period:
        raise ValueError("mismatched domains")
    return TransferFunction(
        np.convolve(g1.num, g2.num),
        np.convolve(g1.den, g2.den),
        domain=g1.domain,
        period=g1.period,
    )


def one_minus(g):
    """1 - G, over G's own denominator."""
    num = g.den.copy()
    num[g.den.size - g.num.size:] -= g.num
    return TransferFunction(num, g.den, domain=g.domain, period=g.period)


class DifferenceEquation:
    """Direct-form realization of a discrete transfer function.

    y[k] = sum_i b[i] u[k-i] - sum_{i>=1} a[i] y[k-i], with the numerator
    padded to the denominator length (leading zeros for strictly proper
    systems). Histories start at zero.
    """

    def __init__(self, tf):
        if tf.domain != "z":
            raise ValueError("difference equation requires a discrete transfer function")
        self.tf = tf
        n = tf.den.size - 1
        self._b = np.concatenate([np.zeros(tf.den.size - tf.num.size), tf.num])
        self._a = tf.den
        self._u = [0.0] * n
        self._y = [0.0] * n

    def reset(self):
        self._u = [0.0] * len(self._u)
        self._y = [0.0] * len(self._y)

    def step(self, u):
        y = self._b[0] * u
        for i in range(1, self._b.size):
            y += self._b[i] * self._u[i - 1]
        for i in range(1, self._a.size):
            y -= self._a[i] * self._y[i - 1]
        if self._u:
            self._u = [u] + self._u[:-1]
            self._y = [y] + self._y[:-1]
        return y


def tf_step(tf, inputs):
    """Response of a discrete transfer function to an input sequence (zero state)."""
    eq = DifferenceEquation(tf)
    return np.array([eq.step(u) for u in np.asarray(inputs, dtype=float)])
