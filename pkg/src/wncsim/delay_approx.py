"""Second-order rational approximations of a pure transport delay e^{-s tau}.

Six classical series; the rounded decimal constants are kept as-is
(0.0833, not 1/12):

  Pade      (1 - 0.5 s tau + 0.0833 s^2 tau^2) / (1 + 0.5 s tau + 0.0833 s^2 tau^2)
  Marshall  (1 - 0.0625 s^2 tau^2)             / (1 + 0.0625 s^2 tau^2)
  Product   (1 - 0.5 s tau + 0.125 s^2 tau^2)  / (1 + 0.5 s tau + 0.125 s^2 tau^2)
  Laguerre  (1 - 0.5 s tau + 0.0625 s^2 tau^2) / (1 + 0.5 s tau + 0.0625 s^2 tau^2)
  Paynter   1 / (1 + s tau + 0.405 s^2 tau^2)
  DFR       (1 - 0.49 s tau + 0.0954 s^2 tau^2) / (1 + 0.49 s tau + 0.0954 s^2 tau^2)

Marshall mirrors the second-order term instead of the first (it has none),
so unlike the other mirrored kinds it is not unit-magnitude on the jw axis;
its denominator has imaginary-axis poles and its step "response" is an
undamped oscillation. It is kept for the error comparison only and is
rejected by the predictor synthesis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .lti import TransferFunction, discretize_bilinear, tf_step


class Series(enum.Enum):
    PADE = "pade"
    MARSHALL = "marshall"
    PRODUCT = "product"
    LAGUERRE = "laguerre"
    PAYNTER = "paynter"
    DFR = "dfr"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ValueError(f"unknown approximant series {name!r}") from None


# denominator 1 + c1 s tau + c2 s^2 tau^2
_COEFFS = {
    Series.PADE: (0.5, 0.0833),
    Series.MARSHALL: (0.0, 0.0625),
    Series.PRODUCT: (0.5, 0.125),
    Series.LAGUERRE: (0.5, 0.0625),
    Series.PAYNTER: (1.0, 0.405),
    Series.DFR: (0.49, 0.0954),
}

# every kind with a mirrored (sign-flipped) numerator; Paynter's numerator is 1.
# Marshall belongs here structurally even though flipping its even term does
# not give unit gain on the jw axis.
_MIRRORED = frozenset(
    {Series.PADE, Series.MARSHALL, Series.PRODUCT, Series.LAGUERRE, Series.DFR}
)


def is_all_pass(kind):
    """True for the mirrored-numerator kinds (all but Paynter)."""
    return Series.parse(kind) in _MIRRORED


def approximant(kind, tau):
    """Continuous transfer function approximating e^{-s tau}; tau = 0 gives unity."""
    kind = Series.parse(kind)
    if tau < 0:
        raise ValueError("delay must be nonnegative")
    if tau == 0:
        return TransferFunction([1.0], [1.0])
    c1, c2 = _COEFFS[kind]
    den = [c2 * tau * tau, c1 * tau, 1.0]
    if kind is Series.MARSHALL:
        num = [-c2 * tau * tau, 0.0, 1.0]
    elif kind in _MIRRORED:
        num = [c2 * tau * tau, -c1 * tau, 1.0]
    else:
        num = [1.0]
    return TransferFunction(num, den)


@dataclass
class ApproxScore:
    """Integrated squared error of one approximant against the ideal delayed step."""

    series: Series
    tau: float
    ise: float
    horizon: float


def ise_error(kind, tau, horizon, dt):
    """Step-response ISE of approximant(kind, tau) against the delayed unit step.

    ISE = sum dt * (step_true(t) - step_approx(t))^2 over [0, horizon), where
    step_true is the unit step delayed by tau. The approximant is discretized
    with the bilinear transform at dt; that route maps imaginary-axis poles
    onto the unit circle, so Marshall's undamped oscillation is reproduced
    without artificial damping.
    """
    kind = Series.parse(kind)
    if tau < 0:
        raise ValueError("delay must be nonnegative")
    if horizon <= 0 or dt <= 0:
        raise ValueError("horizon and dt must be positive")
    if tau > 0:
        if horizon < 10 * tau:
            raise ValueError("horizon must be at least 10*tau")
        if dt > tau / 100:
            raise ValueError("dt must be at most tau/100")
    n = int(round(horizon / dt))
    g = approximant(kind, tau)
    y = tf_step(discretize_bilinear(g, dt), np.ones(n)) if g.order else np.ones(n)
    t = np.arange(n) * dt
    ideal = np.where(t >= tau, 1.0, 0.0)
    ise = float(np.sum((ideal - y) ** 2) * dt)
    return ApproxScore(series=kind, tau=tau, ise=ise, horizon=horizon)
