"""Digital Smith predictor synthesis and recursion.

The predictor transfer function is G_sp(z) = (1 - G_dm(z)) * Ghat(z), where
Ghat(z) = 0.0831/(z - 0.92) is the nominal first-order motor model at
T = 0.02 s and G_dm(z) is the bilinear discretization of a second-order
delay approximant. Expanded into a monic cubic this gives the recursion

  y[n] = f x[n-1] + g x[n-3] - h y[n-1] - i y[n-2] - j y[n-3]

with g = -f (the approximant numerator and denominator differ only in odd
terms, so 1 - G_dm carries a z^2 - 1 factor). The adaptive variant retunes
(f..j) every controller sample from the latest delay estimate while keeping
the input/output histories, so the output stays continuous across retunes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .delay_approx import Series, approximant
from .lti import DifferenceEquation, TransferFunction, discretize_bilinear, multiply, one_minus

CONTROL_PERIOD = 0.02

_SUPPORTED = (Series.DFR, Series.PADE)


def nominal_model(period=CONTROL_PERIOD):
    """Nominal discrete motor model Ghat(z) = 0.0831/(z - 0.92)."""
    return TransferFunction([0.0831], [1.0, -0.92], domain="z", period=period)


@dataclass
class AspCoefficients:
    f: float
    g: float
    h: float
    i: float
    j: float
    series: Series
    t_m: float


def asp_coefficients(series, t_m, nominal=None, period=CONTROL_PERIOD):
    """Predictor coefficients for a delay-model value t_m (seconds).

    Computed by direct polynomial expansion of (1 - G_dm(z)) * Ghat(z)
    rather than from per-series closed-form rationals, so one code path
    serves every supported series and any first-order nominal model.
    At t_m = 0 the approximant is exact unity and the predictor collapses
    to 0/(z - 0.92): f = g = 0 with the nominal pole as the only dynamic.
    """
    kind = Series.parse(series)
    if kind not in _SUPPORTED:
        raise ValueError(f"unsupported predictor series {kind.value!r}")
    if t_m < 0:
        raise ValueError("delay model must be nonnegative")
    if nominal is None:
        nominal = nominal_model(period)
    g_dm = discretize_bilinear(approximant(kind, t_m), period)
    g_sp = multiply(one_minus(g_dm), nominal)
    if g_sp.order == 1:
        f = g = 0.0
        h, i, j = float(g_sp.den[1]), 0.0, 0.0
    else:
        f, g = float(g_sp.num[0]), float(g_sp.num[-1])
        h, i, j = float(g_sp.den[1]), float(g_sp.den[2]), float(g_sp.den[3])
    return AspCoefficients(f=f, g=g, h=h, i=i, j=j, series=kind, t_m=t_m)


def csp_coefficients(fixed_t_m, series="dfr", nominal=None, period=CONTROL_PERIOD):
    """One-shot coefficient set for the classical (non-adaptive) predictor."""
    return asp_coefficients(series, fixed_t_m, nominal, period)


class AspState:
    """Coefficients plus the three-deep input/output histories, zero-initialized."""

    def __init__(self, coefficients):
        self.coefficients = coefficients
        self.x_hist = [0.0, 0.0, 0.0]
        self.y_hist = [0.0, 0.0, 0.0]


def asp_step(state, x_n):
    """One recursion step; x_n becomes the next x[n-1] after the output is formed."""
    c = state.coefficients
    y = (
        c.f * state.x_hist[0]
        + c.g * state.x_hist[2]
        - c.h * state.y_hist[0]
        - c.i * state.y_hist[1]
        - c.j * state.y_hist[2]
    )
    state.x_hist = [x_n, state.x_hist[0], state.x_hist[1]]
    state.y_hist = [y, state.y_hist[0], state.y_hist[1]]
    return y


def asp_retune(state, series, new_t_m, nominal=None, period=CONTROL_PERIOD):
    """Recompute coefficients for new_t_m (seconds); histories are preserved."""
    state.coefficients = asp_coefficients(series, new_t_m, nominal, period)
    return state


def residual(e1, y_asp):
    """Compensated error e2 = e1 - y_asp fed to the PI controller."""
    return e1 - y_asp


class SmithPredictor:
    """Predictor with the retune/step interface the control loop drives.

    adaptive=True retunes from every delay estimate (ASP); adaptive=False
    freezes the coefficients computed for the initial t_m (CSP).
    """

    def __init__(self, series="dfr", t_m=0.0, nominal=None, period=CONTROL_PERIOD,
                 adaptive=True):
        self.series = Series.parse(series)
        self.nominal = nominal if nominal is not None else nominal_model(period)
        self.period = period
        self.adaptive = adaptive
        self.state = AspState(asp_coefficients(self.series, t_m, self.nominal, period))

    @property
    def coefficients(self):
        return self.state.coefficients

    def retune(self, t_m):
        if self.adaptive and t_m != self.state.coefficients.t_m:
            asp_retune(self.state, self.series, t_m, self.nominal, self.period)

    def step(self, x_n):
        return asp_step(self.state, x_n)


class ExactDelayPredictor:
    """Test hook: (1 - z^{-k}) Ghat(z) with an exact integer-sample delay.

    Substituting this for the approximant-based predictor under a constant
    k-sample channel delay and a matched plant makes the Smith compensation
    exact, which is what the equivalence checks exercise.
    """

    def __init__(self, delay_samples, nominal=None, period=CONTROL_PERIOD):
        if delay_samples < 0:
            raise ValueError("delay must be nonnegative")
        self.k = int(delay_samples)
        model = nominal if nominal is not None else nominal_model(period)
        self._model = DifferenceEquation(model)
        self._outputs = deque(maxlen=self.k + 1)

    def retune(self, t_m):
        pass  # the modeled delay is pinned

    def step(self, x_n):
        now = self._model.step(x_n)
        self._outputs.append(now)
        past = self._outputs[0] if len(self._outputs) == self.k + 1 else 0.0
        return float(now - past)
