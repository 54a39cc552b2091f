import random

import numpy as np
import pytest

from wncsim.delay_approx import Series, approximant
from wncsim.lti import discretize_bilinear, multiply, tf_step
from wncsim.predictor import (
    AspState,
    ExactDelayPredictor,
    SmithPredictor,
    asp_coefficients,
    asp_retune,
    asp_step,
    csp_coefficients,
    nominal_model,
    residual,
)


def dfr_closed_form(t):
    # closed-form rationals in the delay-model value t
    e = 954.0 * t * t + 49.0 * t + 1.0
    f = 8.1438 * t / e
    h = (1.08 - 45.08 * t - 2785.68 * t * t) / e
    i = (2709.36 * t * t - 49.0 * t - 0.84) / e
    j = (-877.68 * t * t + 45.08 * t - 0.92) / e
    return f, h, i, j


class TestCoefficients:
    def test_dfr_matches_closed_form(self):
        rng = random.Random(3)
        for _ in range(100):
            t = rng.uniform(0.001, 1.0)
            c = asp_coefficients("dfr", t)
            f, h, i, j = dfr_closed_form(t)
            assert c.f == pytest.approx(f, rel=1e-9)
            assert c.h == pytest.approx(h, rel=1e-9)
            assert c.i == pytest.approx(i, rel=1e-9)
            assert c.j == pytest.approx(j, rel=1e-9)

    def test_worked_point(self):
        c = asp_coefficients("dfr", 0.1)
        assert c.f == pytest.approx(0.81438 / 15.44, rel=1e-12)
        assert c.g == -c.f

    def test_pade_matches_closed_form(self):
        # the pade column keeps the 0.0833 print precision, hence the tolerance
        rng = random.Random(4)
        for _ in range(100):
            t = rng.uniform(0.001, 1.0)
            c = asp_coefficients("pade", t)
            assert c.f == pytest.approx(24.93 * t / (2500 * t * t + 150 * t + 3), rel=1e-3)
            assert c.g == -c.f

    def test_antisymmetric_numerator_is_exact(self):
        rng = random.Random(5)
        for _ in range(100):
            c = asp_coefficients("dfr", rng.uniform(0.0, 1.0))
            assert c.f + c.g == 0.0

    def test_zero_delay_collapses(self):
        c = asp_coefficients("dfr", 0.0)
        assert (c.f, c.g) == (0.0, 0.0)
        assert c.h == pytest.approx(-0.92, rel=1e-15)
        assert (c.i, c.j) == (0.0, 0.0)

    def test_denominator_roots_inside_unit_circle(self):
        rng = random.Random(6)
        for _ in range(50):
            c = asp_coefficients(rng.choice(["dfr", "pade"]), rng.uniform(0.0, 1.0))
            roots = np.roots([1.0, c.h, c.i, c.j])
            assert np.all(np.abs(roots) < 1.0)

    def test_unsupported_series_rejected(self):
        for bad in ("marshall", "paynter", "product", "laguerre"):
            with pytest.raises(ValueError):
                asp_coefficients(bad, 0.1)

    def test_negative_delay_rejected(self):
        with pytest.raises(ValueError):
            asp_coefficients("dfr", -0.02)

    def test_classical_alias(self):
        a = asp_coefficients("dfr", 0.06)
        b = csp_coefficients(0.06, "dfr")
        assert (a.f, a.g, a.h, a.i, a.j) == (b.f, b.g, b.h, b.i, b.j)
        # denominator scale at the nominal operating point
        assert 954 * 0.0036 + 2.94 + 1 == pytest.approx(7.3744, rel=1e-12)


class TestRecursion:
    def test_zero_state_zero_input(self):
        state = AspState(asp_coefficients("dfr", 0.08))
        assert asp_step(state, 0.0) == 0.0

    def test_zero_delay_output_identically_zero(self):
        state = AspState(asp_coefficients("dfr", 0.0))
        rng = random.Random(8)
        assert all(asp_step(state, rng.uniform(-5, 5)) == 0.0 for _ in range(50))

    def test_matches_cascade_oracle(self):
        # y_sp = Ghat*x - (G_dm Ghat)*x realized as two independent filters
        rng = random.Random(9)
        x = np.array([rng.uniform(-1, 1) for _ in range(200)])
        for t_m in (0.02, 0.1, 0.37):
            g_dm = discretize_bilinear(approximant("dfr", t_m), 0.02)
            oracle = tf_step(nominal_model(), x) - tf_step(multiply(g_dm, nominal_model()), x)
            state = AspState(asp_coefficients("dfr", t_m))
            got = np.array([asp_step(state, u) for u in x])
            assert np.max(np.abs(got - oracle)) < 1e-9

    def test_constant_input_settles_to_zero(self):
        # f + g = 0 puts a zero at z = 1, so the dc response vanishes
        rng = random.Random(10)
        for _ in range(10):
            state = AspState(asp_coefficients("dfr", rng.uniform(0.0, 1.0)))
            level = rng.uniform(-200, 200)
            for _ in range(500):
                y = asp_step(state, level)
            assert abs(y) < 1e-8

    def test_impulse_response_absolutely_summable(self):
        for t_m in (0.0, 0.3, 1.0):
            state = AspState(asp_coefficients("dfr", t_m))
            seq = [asp_step(state, 1.0 if n == 0 else 0.0) for n in range(4000)]
            assert sum(abs(v) for v in seq[2000:]) < 1e-9


class TestRetune:
    def test_unchanged_delay_is_bitwise_stable(self):
        state = AspState(asp_coefficients("dfr", 0.07))
        before = state.coefficients
        asp_retune(state, "dfr", 0.07)
        after = state.coefficients
        assert (before.f, before.g, before.h, before.i, before.j) == (
            after.f, after.g, after.h, after.i, after.j)

    def test_histories_survive_retune(self):
        rng = random.Random(11)
        state = AspState(asp_coefficients("dfr", 0.07))
        for _ in range(50):
            asp_step(state, rng.uniform(-1, 1))
        x_hist, y_hist = list(state.x_hist), list(state.y_hist)
        asp_retune(state, "dfr", 0.05)
        assert state.x_hist == x_hist and state.y_hist == y_hist
        c = state.coefficients
        expected = (c.f * x_hist[0] + c.g * x_hist[2]
                    - c.h * y_hist[0] - c.i * y_hist[1] - c.j * y_hist[2])
        assert asp_step(state, 0.3) == expected

    def test_retune_to_zero_decays_geometrically(self):
        rng = random.Random(12)
        state = AspState(asp_coefficients("dfr", 0.3))
        for _ in range(50):
            asp_step(state, rng.uniform(-1, 1))
        asp_retune(state, "dfr", 0.0)
        seq = [asp_step(state, 0.0) for _ in range(100)]
        bound = 2.0 * max(abs(seq[0]), 1e-12)
        assert all(abs(v) <= bound * 0.93**n for n, v in enumerate(seq))


class TestResidual:
    def test_values(self):
        assert residual(5.0, 0.0) == 5.0
        assert residual(0.0, 2.5) == -2.5
        assert residual(1.5, 0.5) == 1.0


class TestSmithPredictor:
    def test_adaptive_retunes(self):
        sp = SmithPredictor("dfr", t_m=0.0)
        sp.retune(0.08)
        assert sp.coefficients.t_m == 0.08

    def test_classical_ignores_retune(self):
        sp = SmithPredictor("dfr", t_m=0.06, adaptive=False)
        frozen = sp.coefficients
        sp.retune(0.3)
        assert sp.coefficients is frozen

    def test_step_delegates_to_recursion(self):
        rng = random.Random(13)
        sp = SmithPredictor("dfr", t_m=0.1)
        state = AspState(asp_coefficients("dfr", 0.1))
        for _ in range(20):
            x = rng.uniform(-1, 1)
            assert sp.step(x) == asp_step(state, x)


class TestExactDelayPredictor:
    def test_zero_delay_is_null(self):
        hook = ExactDelayPredictor(0)
        rng = random.Random(14)
        assert all(hook.step(rng.uniform(-5, 5)) == 0.0 for _ in range(30))

    def test_matches_shifted_model_output(self):
        rng = random.Random(15)
        x = [rng.uniform(-1, 1) for _ in range(60)]
        for k in (1, 3, 7):
            hook = ExactDelayPredictor(k)
            model_out = tf_step(nominal_model(), np.array(x))
            got = [hook.step(u) for u in x]
            for n, v in enumerate(got):
                expected = model_out[n] - (model_out[n - k] if n >= k else 0.0)
                assert v == pytest.approx(expected, abs=1e-15)

    def test_negative_delay_rejected(self):
        with pytest.raises(ValueError):
            ExactDelayPredictor(-1)
