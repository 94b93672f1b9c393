"""Analytic layer oracles.

Strategy: every quantity with a closed form is rebuilt here from public
geometry/channel pieces plus raw quadrature (or brute force: trapezoid
grids, direct Monte Carlo draws) and compared against the implementation.
Complement identities are checked through independently computed halves.
"""

import math

import numpy as np
import pytest

from aerocell import analysis as A
from aerocell import channel as C
from aerocell import geometry as G
from aerocell import params as P
from aerocell import quadrature as Q

DEFAULTS = P.default_params()
FAST = Q.Tolerance(rel=1e-6, abs=1e-9)
MID = Q.Tolerance(rel=1e-8, abs=1e-12)
TIGHT = Q.Tolerance(rel=1e-10, abs=1e-14)
FD = Q.Tolerance(rel=1e-12, abs=1e-16)

TWO_PI_LAM = 2.0 * math.pi * DEFAULTS.lambda_g


def _uav_tier_mass_oracle(params, tol):
    """P(aerial tier wins) assembled directly from public pieces."""
    law = G.UavDistanceLaw(params)

    def f(x):
        e_a = G.exclusion_radius(G.ExclusionKind.BS_GIVEN_UAV, x, params)
        return (params.n_uav * law.pdf(x)
                * np.exp(-math.pi * params.lambda_g * e_a ** 2)
                * law.ccdf(x) ** (params.n_uav - 1))

    return Q.integrate(f, params.h_a, params.w_max, tol,
                       breakpoints=(params.w_knee,)).value


class TestAssociation:
    def test_complement_oracle(self):
        for params in (DEFAULTS, DEFAULTS.replace(h_a=60.0, x_0=300.0)):
            a_g, a_a = A.association_probabilities(params, tol=MID)
            assert a_g + a_a == 1.0
            direct = _uav_tier_mass_oracle(params, MID)
            assert a_a == pytest.approx(direct, abs=2e-6)

    def test_power_limits(self):
        weak_uav = DEFAULTS.replace(p_ta=1e-9)
        a_g, _ = A.association_probabilities(weak_uav, tol=FAST)
        assert a_g > 1.0 - 1e-9
        weak_bs = DEFAULTS.replace(p_tg=1e-9)
        a_g, _ = A.association_probabilities(weak_bs, tol=FAST)
        assert a_g < 1e-6

    def test_dense_ground_wins(self):
        a_g_sparse, _ = A.association_probabilities(DEFAULTS, tol=FAST)
        a_g_dense, _ = A.association_probabilities(
            DEFAULTS.replace(lambda_g=1e-3), tol=FAST)
        assert a_g_dense > 0.99
        assert a_g_dense > a_g_sparse

    def test_serving_pdfs_normalize(self):
        params = DEFAULTS
        e_max = G.exclusion_radius(G.ExclusionKind.BS_GIVEN_UAV, params.w_max, params)
        bps = tuple(
            G.exclusion_radius(G.ExclusionKind.BS_GIVEN_UAV, w, params)
            for w in (params.h_a, params.w_knee))
        mass_bs = Q.integrate(
            lambda r: A.serving_distance_pdf(params, "bs", r, tol=MID),
            0.0, e_max, FAST, breakpoints=bps).value
        assert mass_bs == pytest.approx(1.0, abs=1e-5)
        mass_uav = Q.integrate(
            lambda x: A.serving_distance_pdf(params, "uav", x, tol=MID),
            params.h_a, params.w_max, FAST, breakpoints=(params.w_knee,)).value
        assert mass_uav == pytest.approx(1.0, abs=1e-5)

    def test_serving_pdf_zero_outside_support(self):
        e_max = G.exclusion_radius(G.ExclusionKind.BS_GIVEN_UAV, DEFAULTS.w_max, DEFAULTS)
        assert A.serving_distance_pdf(DEFAULTS, "bs", e_max + 10.0, tol=FAST) == 0.0
        assert A.serving_distance_pdf(DEFAULTS, "uav", DEFAULTS.h_a - 5.0, tol=FAST) == 0.0
        assert A.serving_distance_pdf(DEFAULTS, "uav", DEFAULTS.w_max + 5.0, tol=FAST) == 0.0

    def test_degenerate_tier_raises(self):
        weak_uav = DEFAULTS.replace(p_ta=1e-9)
        with pytest.raises(A.DegenerateTier):
            A.serving_distance_pdf(weak_uav, "uav", 500.0, tol=FAST)

    def test_unknown_tier_rejected(self):
        with pytest.raises(A.AnalysisError):
            A.serving_distance_pdf(DEFAULTS, "satellite", 500.0, tol=FAST)


class TestInterferenceLaplace:
    S_REF = (100.0 ** 2 + DEFAULTS.h_g ** 2) ** (DEFAULTS.eta_g / 2.0) / DEFAULTS.p_tg

    def test_unit_at_zero(self):
        for scenario, d in [(A.InterferenceScenario.BS_EXCEPT_SERVING, 100.0),
                            (A.InterferenceScenario.UAVS_GIVEN_BS, 100.0),
                            (A.InterferenceScenario.ALL_BS_GIVEN_UAV, 200.0),
                            (A.InterferenceScenario.UAVS_EXCEPT_SERVING, 200.0)]:
            assert A.interference_laplace(DEFAULTS, scenario, 0.0, d, tol=FAST) == 1.0

    def test_decreasing_in_s(self):
        for scenario, d in [(A.InterferenceScenario.BS_EXCEPT_SERVING, 100.0),
                            (A.InterferenceScenario.UAVS_GIVEN_BS, 100.0),
                            (A.InterferenceScenario.ALL_BS_GIVEN_UAV, 200.0),
                            (A.InterferenceScenario.UAVS_EXCEPT_SERVING, 200.0)]:
            vals = [A.interference_laplace(DEFAULTS, scenario, s, d, tol=MID)
                    for s in np.geomspace(1e4, 1e9, 6)]
            assert all(0.0 < v <= 1.0 for v in vals)
            assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_ground_field_trapezoid_oracle(self):
        s = self.S_REF
        z = np.geomspace(100.0, 1e7, 2_000_001)
        a_z = DEFAULTS.p_tg * (z * z + DEFAULTS.h_g ** 2) ** (-DEFAULTS.eta_g / 2.0)
        grid = np.trapezoid((1.0 - 1.0 / (1.0 + s * a_z)) * z, z)
        tail = s * DEFAULTS.p_tg / (2.0 * 1e7 ** 2)  # integrand -> s*p*z^-3
        oracle = math.exp(-TWO_PI_LAM * (grid + tail))
        impl = A.interference_laplace(
            DEFAULTS, A.InterferenceScenario.BS_EXCEPT_SERVING, s, 100.0, tol=TIGHT)
        assert impl == pytest.approx(oracle, rel=2e-6)

    def test_aerial_field_monte_carlo_oracle(self):
        params = DEFAULTS
        r, s = 100.0, self.S_REF
        lo = G.exclusion_radius(G.ExclusionKind.UAV_GIVEN_BS, r, params)
        rng = np.random.default_rng(77)
        pts = G.sample_bpp_disk(600_000, params.r_c, rng)
        d = np.hypot(np.hypot(pts[:, 0], pts[:, 1]), params.h_a)
        kept = d[d >= lo]
        b = params.p_ta * kept ** -params.eta_a / params.m_a
        vals = (1.0 + s * b) ** -params.m_a
        j_hat, sig = vals.mean(), vals.std() / math.sqrt(len(vals))
        impl = A.interference_laplace(
            params, A.InterferenceScenario.UAVS_GIVEN_BS, s, r, tol=MID)
        assert impl ** (1.0 / params.n_uav) == pytest.approx(j_hat, abs=4.0 * sig)

    def test_empty_interferer_support(self):
        v = A.interference_laplace(
            DEFAULTS, A.InterferenceScenario.UAVS_EXCEPT_SERVING,
            self.S_REF, DEFAULTS.w_max, tol=FAST)
        assert v == 1.0


class TestInterferenceDerivatives:
    X = 200.0
    S2 = DEFAULTS.m_a * 1.0 * 200.0 ** DEFAULTS.eta_a / DEFAULTS.p_ta

    def test_matches_finite_differences(self):
        T = A.uav_interference_derivatives(DEFAULTS, self.X, self.S2, 3, tol=TIGHT)

        def f0(s):
            return A.uav_interference_derivatives(DEFAULTS, self.X, s, 0, tol=FD)[0]

        for k in (1, 2, 3):
            fd = Q.derivative(f0, self.S2, k)
            assert T[k] == pytest.approx(fd, rel=1e-4)

    def test_sign_alternation(self):
        for s in (1e5, 1e6, 1e7):
            T = A.uav_interference_derivatives(DEFAULTS, self.X, s, 3, tol=MID)
            assert T[0] > 0.0 and T[2] > 0.0
            assert T[1] < 0.0 and T[3] < 0.0

    def test_single_uav_drops_aerial_factor(self):
        solo = DEFAULTS.replace(n_uav=1)
        T = A.uav_interference_derivatives(solo, self.X, self.S2, 1, tol=TIGHT)

        def f0(s):
            return A.uav_interference_derivatives(solo, self.X, s, 0, tol=FD)[0]

        assert T[1] == pytest.approx(Q.derivative(f0, self.S2, 1), rel=1e-4)

    def test_order_cap(self):
        with pytest.raises(A.AnalysisError):
            A.uav_interference_derivatives(DEFAULTS, self.X, self.S2, 4, tol=FAST)


class TestGroundCoverage:
    def test_limit_at_vanishing_threshold(self):
        assert A.conditional_coverage_bs(DEFAULTS, beta=0.0, tol=FAST) == 1.0
        near = A.conditional_coverage_bs(DEFAULTS, beta=1e-12, tol=MID)
        assert near == pytest.approx(1.0, abs=1e-5)

    def test_decreasing_in_threshold(self):
        vals = [A.conditional_coverage_bs(DEFAULTS, beta=b, tol=FAST)
                for b in (0.25, 1.0, 4.0)]
        assert vals[0] > vals[1] > vals[2]
        assert all(0.0 < v < 1.0 for v in vals)


class TestAerialCoverage:
    def test_limit_at_vanishing_threshold(self):
        assert A.conditional_coverage_uav(DEFAULTS, beta=0.0, tol=FAST) == 1.0
        near = A.conditional_coverage_uav(DEFAULTS, beta=1e-12, tol=MID)
        assert near == pytest.approx(1.0, abs=1e-5)

    def test_decreasing_in_threshold(self):
        vals = [A.conditional_coverage_uav(DEFAULTS, beta=b, tol=FAST)
                for b in (0.25, 1.0, 4.0)]
        assert vals[0] > vals[1] > vals[2]
        assert all(0.0 < v < 1.0 for v in vals)

    def test_fading_shape_cap(self):
        with pytest.raises(A.AnalysisError):
            A.conditional_coverage_uav(DEFAULTS.replace(m_a=5), beta=1.0, tol=FAST)
        v = A.conditional_coverage_uav(
            DEFAULTS.replace(m_a=4), beta=1.0, tol=Q.Tolerance(rel=1e-5, abs=1e-8))
        assert 0.0 < v < 1.0


class TestBackhaulTiers:
    def test_nearest_clear_station_pdf_normalizes(self):
        """Independent rebuild: void probability of the thinned ground process."""
        params = DEFAULTS
        lam_coef = 2.0 * math.pi * params.lambda_g
        inner = Q.Tolerance(rel=1e-9, abs=1e-13)

        def f(xs):
            out = np.empty(xs.shape)
            for i, x in enumerate(xs):
                lam_l = lam_coef * Q.integrate(
                    lambda t: C.los_probability(t, params) * t, 0.0, float(x), inner).value
                out[i] = lam_coef * x * C.los_probability(x, params) * math.exp(-lam_l)
            return out

        total = Q.integrate_semi_infinite(f, 0.0, Q.Tolerance(rel=1e-7, abs=1e-10)).value
        assert total == pytest.approx(1.0, abs=1e-5)

    def test_mass_complement_oracle(self):
        for params in (DEFAULTS, DEFAULTS.replace(c_n=DEFAULTS.c_l * 1e4)):
            m_los = A.backhaul_tier_mass(params, "los", tol=MID)
            m_nlos = A.backhaul_tier_mass(params, "nlos", tol=MID)
            assert m_los + m_nlos == pytest.approx(1.0, abs=3e-5)

    def test_probabilities_complement_exactly(self):
        a_l, a_n = A.backhaul_tier_probabilities(DEFAULTS, tol=FAST)
        assert a_l + a_n == 1.0
        assert a_l > 0.99  # clear paths dominate at the default geometry

    def test_strong_blocked_intercept_pulls_mass(self):
        a_l_default, _ = A.backhaul_tier_probabilities(DEFAULTS, tol=FAST)
        a_l_strong, _ = A.backhaul_tier_probabilities(
            DEFAULTS.replace(c_n=DEFAULTS.c_l * 1e4), tol=FAST)
        assert a_l_strong < a_l_default

    def test_serving_pdf_matches_manual_assembly(self):
        params = DEFAULTS.replace(c_n=DEFAULTS.c_l * 1e4)
        lam_coef = 2.0 * math.pi * params.lambda_g
        inner = Q.Tolerance(rel=1e-9, abs=1e-13)
        mass = A.backhaul_tier_mass(params, "los", tol=MID)
        for x in (200.0, 600.0, 1200.0):
            lam_l = lam_coef * Q.integrate(
                lambda t: C.los_probability(t, params) * t, 0.0, x, inner).value
            e_l = G.exclusion_radius(G.ExclusionKind.NLOS_GIVEN_LOS, x, params)
            lam_n = 0.0
            if e_l > 0.0:
                lam_n = lam_coef * Q.integrate(
                    lambda t: (1.0 - C.los_probability(t, params)) * t, 0.0, e_l, inner).value
            manual = lam_coef * x * C.los_probability(x, params) \
                * math.exp(-lam_l - lam_n) / mass
            impl = A.backhaul_serving_distance_pdf(params, "los", x, tol=MID)
            assert impl == pytest.approx(manual, rel=1e-6)

    def test_blocked_serving_pdf_matches_manual_assembly(self):
        params = DEFAULTS.replace(c_n=DEFAULTS.c_l * 1e4)
        lam_coef = 2.0 * math.pi * params.lambda_g
        inner = Q.Tolerance(rel=1e-9, abs=1e-13)
        mass = A.backhaul_tier_mass(params, "nlos", tol=MID)
        x = 600.0
        lam_n = lam_coef * Q.integrate(
            lambda t: (1.0 - C.los_probability(t, params)) * t, 0.0, x, inner).value
        e_n = G.exclusion_radius(G.ExclusionKind.LOS_GIVEN_NLOS, x, params)
        lam_l = lam_coef * Q.integrate(
            lambda t: C.los_probability(t, params) * t, 0.0, e_n, inner).value
        manual = lam_coef * x * (1.0 - C.los_probability(x, params)) \
            * math.exp(-lam_n - lam_l) / mass
        impl = A.backhaul_serving_distance_pdf(params, "nlos", x, tol=MID)
        assert impl == pytest.approx(manual, rel=1e-6)

    def test_mini_monte_carlo_tier_split(self):
        """Direct simulation of the min-path-loss rule pins the exclusion radii."""
        params = DEFAULTS.replace(c_n=DEFAULTS.c_l * 1e4)
        a_los, _ = A.backhaul_tier_probabilities(params, tol=FAST)
        assert a_los < 0.99  # parameters chosen so the split is informative
        rng = np.random.default_rng(4242)
        radius, trials = 8000.0, 4000
        dh2 = params.delta_h ** 2
        mean_n = params.lambda_g * math.pi * radius ** 2
        wins = 0
        for _ in range(trials):
            n = rng.poisson(mean_n)
            s = radius * np.sqrt(rng.random(n))
            clear = rng.random(n) < C.los_probability(s, params)
            z2 = s * s + dh2
            best_l = (params.c_l * z2[clear] ** (-params.eta_l / 2.0)).max(initial=0.0)
            best_n = (params.c_n * z2[~clear] ** (-params.eta_n / 2.0)).max(initial=0.0)
            wins += best_l > best_n
        frac = wins / trials
        sigma = math.sqrt(a_los * (1.0 - a_los) / trials)
        assert abs(frac - a_los) < 4.0 * sigma + 1e-9


class TestBackhaulProbability:
    def test_unit_at_zero_threshold(self):
        assert A.backhaul_probability(DEFAULTS, tau=0.0, tol=FAST) == 1.0

    def test_near_unit_at_tiny_threshold(self):
        v = A.backhaul_probability(DEFAULTS, tau=1e-9, tol=FAST)
        assert v == pytest.approx(1.0, abs=1e-3)

    def test_decreasing_in_threshold(self):
        vals = [A.backhaul_probability(DEFAULTS, tau=t, tol=FAST)
                for t in (0.25, 1.0, 4.0)]
        assert vals[0] > vals[1] > vals[2]
        assert all(0.0 < v <= 1.0 for v in vals)

    def test_merged_population_oracle(self):
        """With identical tiers the split is cosmetic: the success probability
        must equal a single-population computation with a plain Rayleigh
        nearest-station law and no blockage thinning anywhere."""
        params = DEFAULTS.replace(eta_n=DEFAULTS.eta_l, m_n=DEFAULTS.m_l)
        tau = 1.0
        impl = A.backhaul_probability(params, tau=tau, tol=FAST)

        gd = C.gain_distribution(params)
        gbar = gd.gains / gd.serving_gain
        pk = gd.probs
        m = params.m_l
        gam = m * math.factorial(m) ** (-1.0 / m)
        lam_coef = 2.0 * math.pi * params.lambda_g
        dh2 = params.delta_h ** 2
        # the bare rational map in the oracle leaves a sqrt singularity at
        # u=1 for this tail; keep its tolerance above the max-depth floor
        inner = Q.Tolerance(rel=1e-6, abs=1e-10)

        def one_term(n, x):
            zp = (x * x + dh2) ** (params.eta_l / 2.0)
            snr = n * gam * tau * zp * params.sigma2 \
                / (params.p_tb * params.c_l * gd.serving_gain)
            coefs = n * gam * tau * gbar * zp / m

            def fint(t):
                zt = (t * t + dh2) ** (params.eta_l / 2.0)
                hit = -np.expm1(-m * np.log1p(coefs[:, None] / zt[None, :]))
                return lam_coef * (pk @ hit) * t

            u = Q.integrate_semi_infinite(fint, float(x), inner).value
            return math.exp(-snr - u)

        def outer(xs):
            out = np.empty(xs.shape)
            for i, x in enumerate(xs):
                acc = sum((-1.0) ** (n + 1) * math.comb(m, n) * one_term(n, x)
                          for n in range(1, m + 1))
                out[i] = lam_coef * x * math.exp(-math.pi * params.lambda_g * x * x) * acc
            return out

        oracle = Q.integrate_semi_infinite(outer, 0.0, Q.Tolerance(rel=1e-6, abs=1e-9)).value
        assert impl == pytest.approx(oracle, rel=1e-4)


class TestOverallCoverage:
    def test_assembly_identity_exact(self):
        rep = A.overall_coverage(DEFAULTS, beta=1.0, tau_b=1.0, tol=FAST)
        assert rep.p_cov == rep.a_g * rep.p_cov_g + rep.a_a * rep.p_cov_a * rep.s_backhaul
        assert rep.a_g + rep.a_a == 1.0
        assert rep.a_los + rep.a_nlos == 1.0
        for v in (rep.a_g, rep.a_a, rep.a_los, rep.a_nlos, rep.s_backhaul,
                  rep.p_cov_g, rep.p_cov_a, rep.p_cov):
            assert 0.0 <= v <= 1.0
        assert rep.beta == 1.0 and rep.tau_b == 1.0
        assert set(rep.errors) >= {"a_g", "a_los", "s_backhaul",
                                   "p_cov_g", "p_cov_a", "p_cov"}
        assert all(e >= 0.0 for e in rep.errors.values())

    def test_as_dict_round_trip(self):
        rep = A.overall_coverage(DEFAULTS, beta=0.0, tau_b=0.0, tol=FAST)
        d = rep.as_dict()
        assert d["p_cov"] == rep.p_cov
        assert d["s_backhaul"] == 1.0
        assert d["p_cov_g"] == 1.0 and d["p_cov_a"] == 1.0
        assert d["p_cov"] == 1.0

    def test_degenerate_aerial_tier(self):
        rep = A.overall_coverage(DEFAULTS.replace(p_ta=1e-9),
                                 beta=1.0, tau_b=0.0, tol=FAST)
        assert math.isnan(rep.p_cov_a)
        assert rep.a_a < 1e-12
        assert rep.p_cov == pytest.approx(rep.a_g * rep.p_cov_g, abs=1e-12)
        assert math.isfinite(rep.p_cov)
