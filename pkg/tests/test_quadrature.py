"""Adaptive quadrature and finite-difference kernels.

Oracles are closed-form antiderivatives and, for the interference-style
kernel, a brute-force trapezoid sum frozen before the adaptive code existed.
"""

import math

import numpy as np
import pytest

from aerocell import quadrature as Q


def _trapz_oracle():
    """Brute force: \\int_100^inf (1 - 1/(1 + s*P*(z^2+h^2)^-2)) z dz.

    Trapezoid with 1e7 points, cutoff 1e6, plus the analytic tail bound
    s*P/(2*cutoff^2) which is ~1e-8 relative here.
    """
    s, p, h = 1e6, 20.0, 30.0
    z = np.linspace(100.0, 1e6, 10_000_001)
    fz = (1.0 - 1.0 / (1.0 + s * p * (z * z + h * h) ** -2.0)) * z
    val = np.trapezoid(fz, z)
    tail = s * p / (2.0 * 1e12)
    return val + tail


class TestIntegrate:
    def test_polynomial_exact(self):
        r = Q.integrate(lambda x: x ** 3, 0.0, 1.0)
        assert r.value == pytest.approx(0.25, abs=1e-14)

    def test_sin_closed_form(self):
        r = Q.integrate(np.sin, 0.0, math.pi)
        assert r.value == pytest.approx(2.0, rel=1e-12)

    def test_empty_interval(self):
        r = Q.integrate(np.sin, 1.3, 1.3)
        assert r.value == 0.0 and r.error == 0.0

    def test_reversed_interval_negates(self):
        fwd = Q.integrate(np.exp, 0.0, 1.0)
        rev = Q.integrate(np.exp, 1.0, 0.0)
        assert rev.value == pytest.approx(-fwd.value, rel=1e-14)

    def test_zero_function(self):
        r = Q.integrate(lambda x: np.zeros_like(x), 0.0, 10.0)
        assert r.value == 0.0

    def test_linearity_within_tolerance(self):
        tol = Q.Tolerance(rel=1e-10, abs=1e-14)
        f = lambda x: np.exp(-x) * np.sin(3 * x)
        g = lambda x: 1.0 / (1.0 + x * x)
        a, b = 0.0, 5.0
        lhs = Q.integrate(lambda x: 2 * f(x) + 3 * g(x), a, b, tol)
        rhs = 2 * Q.integrate(f, a, b, tol).value + 3 * Q.integrate(g, a, b, tol).value
        budget = 2 * max(tol.abs, tol.rel * abs(lhs.value))
        assert abs(lhs.value - rhs) <= budget + 5e-14

    def test_breakpoints_help_kinked_integrand(self):
        f = lambda x: np.abs(x - 0.5)
        r = Q.integrate(f, 0.0, 1.0, breakpoints=(0.5,))
        assert r.value == pytest.approx(0.25, abs=1e-14)

    def test_integrable_endpoint_singularity(self):
        # int_0^1 x^-0.5 = 2
        r = Q.integrate(lambda x: x ** -0.5, 0.0, 1.0, Q.Tolerance(rel=1e-9, abs=1e-12))
        assert r.value == pytest.approx(2.0, rel=1e-8)

    def test_non_finite_evaluation_raises(self):
        def f(x):
            return np.where(x > 0.5, np.nan, 1.0)

        with pytest.raises(Q.NonFiniteEvaluation):
            Q.integrate(f, 0.0, 1.0)

    def test_non_convergence_raises_with_partial_result(self):
        tol = Q.Tolerance(rel=0.0, abs=1e-300, max_depth=12)
        with pytest.raises(Q.NonConvergence) as exc:
            Q.integrate(lambda x: x ** -0.5, 0.0, 1.0, tol)
        assert exc.value.value == pytest.approx(2.0, rel=1e-3)
        assert exc.value.error > 0


class TestSemiInfinite:
    def test_exponential(self):
        r = Q.integrate_semi_infinite(lambda t: np.exp(-t), 0.0)
        assert r.value == pytest.approx(1.0, rel=1e-10)

    def test_shifted_lower_limit(self):
        r = Q.integrate_semi_infinite(lambda t: np.exp(-t), 2.5)
        assert r.value == pytest.approx(math.exp(-2.5), rel=1e-10)

    def test_gaussian(self):
        r = Q.integrate_semi_infinite(lambda t: np.exp(-t * t), 0.0)
        assert r.value == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-10)

    def test_power_tail(self):
        r = Q.integrate_semi_infinite(lambda t: t ** -2.0, 1.0)
        assert r.value == pytest.approx(1.0, rel=1e-9)

    def test_slow_power_tail(self):
        # eta just above 2 stresses the u -> 1 endpoint of the substitution
        r = Q.integrate_semi_infinite(lambda t: t ** -1.5, 1.0, Q.Tolerance(rel=1e-8, abs=0.0))
        assert r.value == pytest.approx(2.0, rel=1e-7)

    def test_interference_kernel_vs_trapezoid(self):
        s, p, h = 1e6, 20.0, 30.0

        def f(z):
            return (1.0 - 1.0 / (1.0 + s * p * (z * z + h * h) ** -2.0)) * z

        oracle = _trapz_oracle()
        r = Q.integrate_semi_infinite(f, 100.0, Q.Tolerance(rel=1e-10, abs=1e-12))
        assert r.value == pytest.approx(oracle, rel=1e-6)


class TestErrorEstimateHonesty:
    BATTERY = [
        (np.sin, 0.0, math.pi, 2.0),
        (np.exp, 0.0, 1.0, math.e - 1.0),
        (lambda x: 1.0 / (1.0 + 25.0 * x * x), -1.0, 1.0, 2.0 * math.atan(5.0) / 5.0),
        (lambda x: x ** -0.5, 0.0, 1.0, 2.0),
        (lambda x: np.cos(40.0 * x), 0.0, 1.0, math.sin(40.0) / 40.0),
    ]

    @pytest.mark.parametrize("f,a,b,exact", BATTERY)
    def test_reported_error_bounds_actual(self, f, a, b, exact):
        r = Q.integrate(f, a, b, Q.Tolerance(rel=1e-9, abs=1e-13))
        actual = abs(r.value - exact)
        assert r.error >= actual - 1e-14

    def test_semi_infinite_honesty(self):
        r = Q.integrate_semi_infinite(lambda t: np.exp(-t), 0.0)
        assert r.error >= abs(r.value - 1.0) - 1e-14


class TestDerivative:
    def test_order_zero(self):
        assert Q.derivative(math.exp, 1.0, 0) == math.exp(1.0)

    @pytest.mark.parametrize("k,tol", [(1, 1e-8), (2, 1e-6), (3, 1e-4)])
    def test_exponential_orders(self, k, tol):
        d = Q.derivative(math.exp, 1.0, k)
        assert d == pytest.approx(math.e, rel=tol)

    def test_fourth_order_on_quartic(self):
        # 5-point stencil is exact for x^4 up to roundoff
        d = Q.derivative(lambda x: x ** 4, 1.0, 4)
        assert d == pytest.approx(24.0, rel=1e-3)

    def test_third_order_on_quartic(self):
        d = Q.derivative(lambda x: x ** 4, 1.0, 3)
        assert d == pytest.approx(24.0, rel=1e-6)

    def test_scale_invariance_of_step(self):
        # large argument: relative step keeps the difference well-conditioned
        f = lambda x: math.log(x)
        d = Q.derivative(f, 1e6, 1)
        assert d == pytest.approx(1e-6, rel=1e-7)

    def test_order_bounds(self):
        with pytest.raises(ValueError):
            Q.derivative(math.exp, 1.0, 5)
        with pytest.raises(ValueError):
            Q.derivative(math.exp, 1.0, -1)


class TestTolerance:
    def test_defaults(self):
        t = Q.Tolerance()
        assert t.rel == 1e-8 and t.abs == 1e-12 and t.max_depth == 60

    def test_tighter(self):
        t = Q.Tolerance().tighter(10.0)
        assert t.rel == 1e-9 and t.abs == 1e-13 and t.max_depth == 60
