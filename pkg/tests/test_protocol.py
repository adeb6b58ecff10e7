import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvqkd import protocol as P
from cvqkd.errors import ConvergenceError, DomainError, PreconditionError
from cvqkd.gaussian import entropy_g, symplectic_spectrum

from conftest import williamson_oracle

# 40-digit mpmath evaluations
LIMIT_EPS0 = 0.3895735680349607
KD_ASYM_T07 = 0.2619075472044314  # T=0.7, eps0=0.1, eps_c=0.05
KR_ASYM_T07 = 0.2995126214390219
HOLEVO_DIRECT_V20 = 1.8159039097672236  # V=20, T=0.5, eps0=0.1, eps_c=0.05
HOLEVO_REVERSE_V20 = 1.5226806097529119
MUTUAL_INFO_V20 = 1.6491245492089259

HIGH_V = 1e6


def pt(V=20.0, T=0.5, eps0=0.0, eps_c=0.0):
    return P.SourceParams.from_total_variance(V, eps0), P.ChannelParams(T, eps_c)


def random_points(n, seed=7):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield pt(rng.uniform(1.0, 1e3), rng.uniform(1e-3, 1 - 1e-3), rng.uniform(0, 1), rng.uniform(0, 1))


class TestParams:
    @pytest.mark.parametrize("T", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_transmittance_open_interval(self, T):
        with pytest.raises(DomainError, match="strictly inside"):
            P.ChannelParams(T)

    def test_negative_noises(self):
        with pytest.raises(DomainError):
            P.SourceParams(1.0, -0.1)
        with pytest.raises(DomainError):
            P.ChannelParams(0.5, -0.1)
        with pytest.raises(DomainError):
            P.SourceParams(-1.0)

    def test_total_variance(self):
        src = P.SourceParams(19.0, 0.1)
        assert src.V == 20.0
        assert P.SourceParams.from_total_variance(20.0, 0.1) == src


class TestChi:
    def test_half_transmittance(self):
        assert P.chi_total(*pt(T=0.5)) == 1.0

    def test_direct_sum(self):
        assert P.chi_total(*pt(T=0.5, eps0=0.1, eps_c=0.05)) == pytest.approx(1.15, abs=1e-15)

    def test_decreasing_in_T(self):
        chis = [P.chi_total(*pt(T=T, eps0=0.1, eps_c=0.02)) for T in np.linspace(0.01, 0.99, 99)]
        assert np.all(np.diff(chis) < 0)


class TestCovariances:
    def test_gamma_ab_closed_forms(self):
        src, ch = pt(V=20, T=0.5, eps0=0.1)
        g = P.build_gamma_ab(src, ch)
        assert g.det_direct() == pytest.approx(P.det_gamma_ab_closed_form(src, ch), rel=1e-10)
        assert g.delta_direct() == pytest.approx(P.delta_gamma_ab_closed_form(src, ch), rel=1e-10)
        chi = 1.1
        assert P.det_gamma_ab_closed_form(src, ch) == pytest.approx((0.5 + 0.5 * chi * 20) ** 2, rel=1e-14)

    def test_gamma_ab_blocks(self):
        src, ch = pt(V=5, T=0.3, eps0=0.2, eps_c=0.1)
        g = P.build_gamma_ab(src, ch)
        chi = 0.7 / 0.3 + 0.3
        np.testing.assert_allclose(g.a_block, 5 * np.eye(2))
        np.testing.assert_allclose(g.b_block, 0.3 * (5 + chi) * np.eye(2))
        np.testing.assert_allclose(g.c_block, math.sqrt(0.3 * 24) * np.diag([1, -1]))

    @pytest.mark.parametrize("V", [1.0, 2.0, 20.0, 100.0])
    def test_lossless_noiseless_is_pure(self, V):
        s = symplectic_spectrum(P.build_gamma_ab(*pt(V=V, T=1 - 1e-9)))
        assert (s.s1, s.s2) == pytest.approx((1.0, 1.0), abs=1e-6)

    def test_conditioned_closed_forms(self):
        src, ch = pt(V=20, T=0.5, eps0=0.1)
        g = P.build_gamma_ab_conditioned_on_alice(src, ch)
        T, V, chi = 0.5, 20.0, 1.1
        assert g.det_direct() == pytest.approx((T + T * chi) * (T + T * chi * V), rel=1e-10)
        assert g.delta_direct() == pytest.approx(
            2 * T + T * T * chi * (1 + chi) + (T * T * chi + (1 - T) ** 2) * V, rel=1e-10
        )

    def test_conditioned_entries(self):
        src, ch = pt(V=20, T=0.5, eps0=0.1)
        m = P.build_gamma_ab_conditioned_on_alice(src, ch).matrix
        T, V, chi = 0.5, 20.0, 1.1
        assert m[0, 0] == pytest.approx(2 * V / (V + 1))
        assert m[1, 1] == pytest.approx((V + 1) / 2)
        assert m[2, 2] == pytest.approx(T * (1 + chi))
        assert m[3, 3] == pytest.approx(T * (V + chi))
        assert m[0, 2] == pytest.approx(math.sqrt(2 * T * (V - 1) / (V + 1)))
        assert m[1, 3] == pytest.approx(-math.sqrt(T * (V * V - 1) / 2))
        assert m[0, 1] == m[0, 3] == m[1, 2] == 0.0

    def test_conditioned_without_modulation(self):
        g = P.build_gamma_ab_conditioned_on_alice(*pt(V=1.0, T=0.4, eps0=0.2))
        np.testing.assert_array_equal(g.a_block, np.eye(2))
        np.testing.assert_array_equal(g.c_block, np.zeros((2, 2)))

    def test_random_points_closed_forms_and_oracle(self):
        for src, ch in random_points(200, seed=3):
            for build, det_cf, delta_cf in (
                (P.build_gamma_ab, P.det_gamma_ab_closed_form, P.delta_gamma_ab_closed_form),
                (P.build_gamma_ab_conditioned_on_alice, P.det_gamma_conditioned_closed_form,
                 P.delta_gamma_conditioned_closed_form),
            ):
                g = build(src, ch)
                assert g.det_direct() == pytest.approx(det_cf(src, ch), rel=1e-10)
                assert g.delta_direct() == pytest.approx(delta_cf(src, ch), rel=1e-10)
                s = symplectic_spectrum(g)
                assert [s.s1, s.s2] == pytest.approx(williamson_oracle(g.matrix), rel=1e-8)


    def test_closed_form_spectra_match_direct_path(self):
        for src, ch in random_points(200, seed=11):
            for closed, build in ((P.spectrum_gamma_ab, P.build_gamma_ab),
                                  (P.spectrum_gamma_conditioned, P.build_gamma_ab_conditioned_on_alice)):
                a, b = closed(src, ch), symplectic_spectrum(build(src, ch))
                assert (a.s1, a.s2) == pytest.approx((b.s1, b.s2), rel=1e-9)

    @pytest.mark.parametrize("V", [1e7, 1e8])
    def test_very_high_modulation_still_physical(self, V):
        r = P.key_rates(*pt(V=V, T=0.7))
        assert abs(r.k_reverse - r.k_reverse_asymptotic) < 1e-6


class TestMutualInformation:
    def test_no_modulation(self):
        assert P.mutual_information(*pt(V=1.0, eps0=0.3)) == 0.0

    def test_exact(self):
        assert P.mutual_information(*pt(V=3.0, T=0.5)) == pytest.approx(0.5, abs=1e-15)

    def test_regression(self):
        assert P.mutual_information(*pt(T=0.5, eps0=0.1, eps_c=0.05)) == pytest.approx(MUTUAL_INFO_V20, rel=1e-13)

    def test_variance_ratio(self):
        src, ch = pt(V=7.0, T=0.3, eps0=0.2, eps_c=0.1)
        chi = P.chi_total(src, ch)
        vb, vba = 0.3 * (7 + chi), 0.3 * (1 + chi)
        assert P.mutual_information(src, ch) == pytest.approx(0.5 * math.log2(vb / vba), rel=1e-14)


class TestHolevo:
    def test_direct_regression(self):
        assert P.holevo_direct(*pt(T=0.5, eps0=0.1, eps_c=0.05)) == pytest.approx(HOLEVO_DIRECT_V20, rel=1e-10)

    def test_reverse_regression(self):
        assert P.holevo_reverse(*pt(T=0.5, eps0=0.1, eps_c=0.05)) == pytest.approx(HOLEVO_REVERSE_V20, rel=1e-10)

    @pytest.mark.parametrize("fn", [P.holevo_direct, P.holevo_reverse])
    @pytest.mark.parametrize("V", [2.0, 20.0, 100.0])
    def test_pure_lossless_channel_leaks_nothing(self, fn, V):
        assert abs(fn(*pt(V=V, T=1 - 1e-9))) < 1e-6

    @pytest.mark.parametrize("fn", [P.holevo_direct, P.holevo_reverse])
    def test_nonnegative_on_grid(self, fn):
        for V in (1.0, 1.5, 5.0, 50.0, 1e4):
            for T in (0.05, 0.3, 0.5, 0.8, 0.99):
                for e0 in (0.0, 0.2, 1.0):
                    for ec in (0.0, 0.1):
                        assert fn(*pt(V, T, e0, ec)) >= -1e-9

    def test_reverse_conditioning_matches_schur_complement(self):
        src, ch = pt(V=9.0, T=0.4, eps0=0.1, eps_c=0.05)
        g = P.build_gamma_ab(src, ch)
        cond = P.conditional_alice_given_bob_q(g)
        b = g.b_block[0, 0]
        c = g.c_block[0, 0]
        np.testing.assert_allclose(cond, np.diag([9.0 - c * c / b, 9.0]), rtol=1e-14)

    def test_direct_decomposes_at_high_modulation(self):
        src, ch = pt(V=HIGH_V, T=0.5, eps0=0.1)
        expected = P.mutual_information(src, ch) - P.k_direct_asymptotic(src, ch)
        assert P.holevo_direct(src, ch) == pytest.approx(expected, abs=1e-3)

    def test_reverse_decomposes_at_high_modulation(self):
        src, ch = pt(V=HIGH_V, T=0.5, eps0=0.1)
        k = P.mutual_information(src, ch) - P.holevo_reverse(src, ch)
        assert k == pytest.approx(P.k_reverse_asymptotic(src, ch), abs=1e-3)


class TestKeyRates:
    def test_noiseless_high_modulation(self):
        r = P.key_rates(*pt(V=HIGH_V, T=0.5))
        assert r.k_reverse == pytest.approx(0.5, abs=1e-3)
        assert r.prior_k_reverse == pytest.approx(0.5, abs=1e-3)
        assert r.k_reverse_asymptotic == pytest.approx(0.5, abs=1e-14)

    def test_definitional_identities(self):
        for src, ch in random_points(50):
            r = P.key_rates(src, ch)
            assert r.k_direct == r.mutual_info - r.holevo_direct
            assert r.k_reverse == r.mutual_info - r.holevo_reverse
            assert r.k_direct <= r.mutual_info + 1e-12
            assert r.k_reverse <= r.mutual_info + 1e-12

    def test_prior_absent_on_noisy_channel(self):
        r = P.key_rates(*pt(eps_c=0.01))
        assert r.prior_k_reverse is None and r.prior_k_reverse_asymptotic is None

    def test_negative_rates_not_clamped(self):
        r = P.key_rates(*pt(V=20, T=0.1, eps0=0.1))
        assert r.k_direct < 0

    def test_bound_below_prior_when_source_noisy(self):
        for T in np.linspace(0.02, 0.98, 49):
            r = P.key_rates(*pt(V=HIGH_V, T=T, eps0=0.2))
            assert r.k_reverse_asymptotic < r.prior_k_reverse_asymptotic


class TestAsymptotic:
    def test_direct_regression_values(self):
        assert P.k_direct_asymptotic(*pt(T=0.5)) == pytest.approx(0.0, abs=1e-15)
        assert P.k_direct_asymptotic(*pt(T=0.7, eps0=0.1, eps_c=0.05)) == pytest.approx(KD_ASYM_T07, rel=1e-12)

    def test_reverse_regression_values(self):
        assert P.k_reverse_asymptotic(*pt(T=0.5)) == pytest.approx(0.5, abs=1e-15)
        assert P.k_reverse_asymptotic(*pt(T=0.7, eps0=0.1, eps_c=0.05)) == pytest.approx(KR_ASYM_T07, rel=1e-12)

    @pytest.mark.parametrize("T", [0.3, 0.5, 0.7])
    @pytest.mark.parametrize("eps0", [0.0, 0.1])
    def test_finite_modulation_converges(self, T, eps0):
        r = P.key_rates(*pt(V=HIGH_V, T=T, eps0=eps0))
        assert abs(r.k_direct - r.k_direct_asymptotic) < 1e-3
        assert abs(r.k_reverse - r.k_reverse_asymptotic) < 1e-3

    def test_direct_continuity(self):
        vals = [P.k_direct_asymptotic(*pt(T=T, eps0=0.1)) for T in np.arange(0.1, 0.999, 1e-3)]
        assert np.max(np.abs(np.diff(vals))) < 0.01

    def test_direct_rejects_invalid_argument(self, monkeypatch):
        # chi below the pure-loss value cannot come from valid parameters
        monkeypatch.setattr(P, "chi_total", lambda src, ch: 0.5 * (1 - ch.T) / ch.T)
        with pytest.raises(DomainError, match="validity"):
            P.k_direct_asymptotic(*pt(T=0.5))

    @settings(max_examples=300, deadline=None)
    @given(st.floats(1e-3, 1 - 1e-3))
    def test_reverse_equals_prior_without_source_noise(self, T):
        src, ch = pt(V=HIGH_V, T=T)
        a, b = P.k_reverse_asymptotic(src, ch), P.prior_k_reverse_asymptotic(src, ch)
        assert abs(a - b) <= 1e-12 * max(1.0, abs(b))

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.01, 0.99), st.floats(0, 1), st.floats(1e-4, 0.5))
    def test_reverse_decreasing_in_noise(self, T, eps, d):
        base = P.k_reverse_asymptotic(*pt(T=T, eps0=eps, eps_c=0.05))
        assert P.k_reverse_asymptotic(*pt(T=T, eps0=eps + d, eps_c=0.05)) < base
        assert P.k_reverse_asymptotic(*pt(T=T, eps0=eps, eps_c=0.05 + d)) < base

    def test_vanishes_at_noise_limit(self):
        assert abs(P.k_reverse_asymptotic(*pt(T=1 - 1e-6, eps0=0.3896))) < 1e-3


class TestPrior:
    def test_requires_noiseless_channel(self):
        with pytest.raises(PreconditionError):
            P.prior_k_reverse(*pt(eps_c=0.01))
        with pytest.raises(PreconditionError):
            P.prior_k_reverse_asymptotic(*pt(eps_c=0.01))

    def test_asymptotic_half(self):
        assert P.prior_k_reverse_asymptotic(*pt(T=0.5)) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("T", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("eps0", [0.0, 0.2])
    def test_finite_converges(self, T, eps0):
        src, ch = pt(V=HIGH_V, T=T, eps0=eps0)
        assert abs(P.prior_k_reverse(src, ch) - P.prior_k_reverse_asymptotic(src, ch)) < 1e-3

    def test_dominates_bound(self):
        for e0 in (0.0, 0.05, 0.3, 1.0):
            for T in np.linspace(0.01, 0.99, 50):
                src, ch = pt(T=T, eps0=e0)
                assert P.prior_k_reverse_asymptotic(src, ch) >= P.k_reverse_asymptotic(src, ch) - 1e-12

    def test_gap_is_entropy_excess(self):
        # bound - prior = log2(x)/2 - g(x) with x = T chi / (1 - T)
        src, ch = pt(T=0.6, eps0=0.25)
        x = 0.6 * P.chi_total(src, ch) / 0.4
        gap = P.k_reverse_asymptotic(src, ch) - P.prior_k_reverse_asymptotic(src, ch)
        assert gap == pytest.approx(0.5 * math.log2(x) - entropy_g(x), rel=1e-12)


class TestNoiseLimit:
    def test_closed_form(self):
        lim = P.limiting_epsilon0()
        assert lim.closed_form == pytest.approx(LIMIT_EPS0, rel=1e-15)
        assert 0.389 <= lim.closed_form <= 0.390
        assert abs(lim.closed_form - 0.3896) < 5e-4

    def test_bisection_agrees(self):
        lim = P.limiting_epsilon0()
        assert lim.difference < 1e-6
        assert lim.iterations <= 200

    @pytest.mark.parametrize("eps0,sign", [(0.3, 1), (0.5, -1)])
    def test_sign_brackets_root(self, eps0, sign):
        assert sign * P.k_reverse_asymptotic(*pt(T=1 - 1e-6, eps0=eps0)) > 0

    def test_convergence_failure(self):
        with pytest.raises(ConvergenceError):
            P.limiting_epsilon0(maxiter=5)


class TestEBBound:
    @pytest.mark.parametrize("eps0", [0.0, 0.1, 3.0])
    def test_no_modulation(self, eps0):
        src = P.SourceParams(0.0, eps0)
        assert P.validate_eb_covariance_bound(src)
        assert P.eb_bound_slack(src) == pytest.approx(eps0 + 1 - 1 / (1 + eps0))

    @pytest.mark.parametrize("V", [1.0, 2.0, 1e3, 1e6])
    def test_tight_without_source_noise(self, V):
        src = P.SourceParams.from_total_variance(V, 0.0)
        assert P.eb_bound_slack(src) == 0.0
        assert P.validate_eb_covariance_bound(src)

    def test_slack_matches_bound(self):
        V, e = 7.0, 0.3
        direct = (V + e) * V - V / (V + e) - (V * V - 1)
        assert P.eb_bound_slack(P.SourceParams.from_total_variance(V, e)) == pytest.approx(direct, rel=1e-13)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(1.0, 1e6), st.floats(0.0, 10.0))
    def test_always_satisfied(self, V, e):
        assert P.validate_eb_covariance_bound(P.SourceParams.from_total_variance(V, e))
