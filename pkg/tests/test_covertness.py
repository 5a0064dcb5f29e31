"""Relative-entropy covertness measures and photon budgets."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covertsense.covertness import (
    covert_budget,
    equal_bath_c2,
    equal_bath_c3,
    equal_bath_qre,
    qre_gaussian,
    taylor_c2,
    taylor_c3,
    taylor_coefficients,
    willie_error_lower_bound,
    willie_qre,
)
from covertsense.errors import (
    DegenerateCovertnessError,
    DomainError,
    InfiniteQreError,
)
from covertsense.gaussian import thermal_cm, vacuum_cm
from covertsense.scenario import SensingScenario, willie_cm

REFERENCE = SensingScenario(0.5, 0.5, 1.0, 1.0)  # eta_eff 1/4, nb_eff 1


class TestQreGaussian:
    def test_self_distance_zero(self):
        cm = willie_cm(REFERENCE, 0.07, 0.3)
        assert abs(qre_gaussian(cm, cm).nats) <= 1e-10

    def test_thermal_pair_closed_form(self):
        # D(th(n0) || th(n1)) = -n0 log1p(dn/n0) + (n0+1) log1p(dn/(n0+1))
        n0, n1 = 0.4, 1.1
        want = -n0 * math.log1p((n1 - n0) / n0) + (n0 + 1) * math.log1p(
            (n1 - n0) / (n0 + 1)
        )
        got = qre_gaussian(thermal_cm([n0]), thermal_cm([n1])).nats
        assert got == pytest.approx(want, rel=1e-12)

    def test_vacuum_vs_unit_thermal(self):
        got = qre_gaussian(vacuum_cm(1), thermal_cm([1.0])).nats
        assert got == pytest.approx(math.log(2.0), rel=1e-12)

    def test_additivity_over_modes(self):
        one = qre_gaussian(thermal_cm([0.2]), thermal_cm([0.9])).nats
        two = qre_gaussian(thermal_cm([0.2, 0.2]), thermal_cm([0.9, 0.9])).nats
        assert two == pytest.approx(2.0 * one, rel=1e-12)

    def test_diverges_onto_pure_state(self):
        with pytest.raises(InfiniteQreError):
            qre_gaussian(thermal_cm([1.0]), vacuum_cm(1))

    def test_asymmetry(self):
        a, b = thermal_cm([0.3]), thermal_cm([2.0])
        assert qre_gaussian(a, b).nats != pytest.approx(qre_gaussian(b, a).nats, rel=1e-3)

    def test_mode_count_mismatch(self):
        with pytest.raises(ValueError):
            qre_gaussian(vacuum_cm(1), vacuum_cm(2))


class TestWillieQre:
    def test_matches_direct_route(self):
        ns = 0.03
        direct = qre_gaussian(
            willie_cm(REFERENCE, 0.0, 0.0), willie_cm(REFERENCE, ns, 0.0)
        ).nats
        assert willie_qre(REFERENCE, ns) == pytest.approx(direct, rel=1e-9)

    def test_matches_direct_route_on_unequal_baths(self):
        scenario = SensingScenario(0.65, 0.85, 0.4, 1.7)
        ns = 0.05
        direct = qre_gaussian(
            willie_cm(scenario, 0.0, 0.0), willie_cm(scenario, ns, 0.0)
        ).nats
        assert willie_qre(scenario, ns) == pytest.approx(direct, rel=1e-9)

    def test_axis_reversal_regression(self):
        # When nbar_s exceeds an equal bath, the adversary state's principal
        # axes swap; the normal-delta route must track the reversal.  This
        # pinned a real defect: the aligned-branch formula returned dd = 0
        # at the swap, giving D = 0.02104 instead of 0.02700.
        eta = 0.6
        scenario = SensingScenario(math.sqrt(eta), math.sqrt(eta), 0.01, 0.01)
        got = willie_qre(scenario, 0.1)
        assert got == pytest.approx(equal_bath_qre(eta, 0.01, 0.1), abs=1e-12)
        direct = qre_gaussian(
            willie_cm(scenario, 0.0, 0.0), willie_cm(scenario, 0.1, 0.0)
        ).nats
        assert got == pytest.approx(direct, rel=1e-9)

    @given(theta=st.floats(-10.0, 10.0))
    def test_theta_invariance(self, theta):
        assert willie_qre(REFERENCE, 0.05, theta) == willie_qre(REFERENCE, 0.05, 0.0)

    def test_theta_invariance_against_direct_route(self):
        # The interrogation phase sits inside the channel, so BOTH
        # hypothesis states carry it; with matched frames the divergence
        # is phase-independent (the phase acts as one local rotation).
        for theta in (0.0, 0.7, -2.1):
            direct = qre_gaussian(
                willie_cm(REFERENCE, 0.0, theta), willie_cm(REFERENCE, 0.05, theta)
            ).nats
            assert willie_qre(REFERENCE, 0.05) == pytest.approx(direct, rel=1e-9)

    def test_zero_signal_zero_qre(self):
        assert willie_qre(REFERENCE, 0.0) == 0.0

    def test_negative_signal_rejected(self):
        with pytest.raises(ValueError):
            willie_qre(REFERENCE, -0.01)

    @given(ns=st.floats(1e-6, 0.5))
    @settings(max_examples=50)
    def test_nonnegative(self, ns):
        assert willie_qre(REFERENCE, ns) >= 0.0


class TestEqualBathClosedForms:
    def test_qre_validation(self):
        with pytest.raises(ValueError):
            equal_bath_qre(1.5, 1.0, 0.1)
        with pytest.raises(ValueError):
            equal_bath_qre(0.5, -1.0, 0.1)

    def test_c2_golden(self):
        assert equal_bath_c2(0.25, 1.0) == pytest.approx(1.8, rel=1e-15)

    def test_c3_golden(self):
        assert equal_bath_c3(0.25, 1.0) == pytest.approx(-12.96, rel=1e-15)

    def test_degenerate_bath_rejected(self):
        with pytest.raises(DomainError):
            equal_bath_c2(0.5, 0.0)

    @given(
        eta=st.floats(0.05, 0.95),
        nb=st.floats(0.01, 10.0),
        ns=st.floats(1e-6, 0.05),
    )
    @settings(max_examples=60)
    def test_qre_taylor_consistency(self, eta, nb, ns):
        # D = c2 ns^2/2 + c3 ns^3/6 + O(ns^4) with an explicit quartic
        # remainder bound keeps this a two-sided check.
        d = equal_bath_qre(eta, nb, ns)
        c2, c3 = equal_bath_c2(eta, nb), equal_bath_c3(eta, nb)
        cubic = c2 * ns * ns / 2.0 + c3 * ns**3 / 6.0
        n0 = eta * nb
        quartic_scale = abs(c3) * (1.0 + 2.0 * n0) / (n0 * (1.0 + n0))
        assert abs(d - cubic) <= quartic_scale * ns**4 + 1e-15


class TestTaylorCoefficients:
    def test_matches_closed_forms_at_reference(self):
        coeffs = taylor_coefficients(REFERENCE)
        assert coeffs.c2 == pytest.approx(1.8, rel=1e-9)
        assert coeffs.c3 == pytest.approx(-12.96, rel=1e-8)
        assert coeffs.step > 0.0

    def test_wrappers_agree(self):
        assert taylor_c2(REFERENCE) == taylor_coefficients(REFERENCE).c2
        assert taylor_c3(REFERENCE) == taylor_coefficients(REFERENCE).c3

    def test_unequal_baths_supported(self):
        # No closed form applies; the numeric route must still match the
        # QRE it differentiates.
        scenario = SensingScenario(0.7, 0.9, 0.5, 2.0)
        c2 = taylor_c2(scenario)
        ns = 1e-4
        assert willie_qre(scenario, ns) == pytest.approx(c2 * ns * ns / 2.0, rel=1e-3)

    def test_vacuum_bath_rejected(self):
        with pytest.raises(DomainError):
            taylor_coefficients(SensingScenario(0.5, 0.5, 0.0, 0.0))

    def test_explicit_step_honoured(self):
        coeffs = taylor_coefficients(REFERENCE, base_step=1e-4)
        assert coeffs.step == 1e-4
        assert coeffs.c2 == pytest.approx(1.8, rel=1e-7)


class TestCovertBudget:
    def test_budget_golden(self):
        budget = covert_budget(REFERENCE, 1e-3, 1e6)
        assert budget.nbar_s == pytest.approx(2.98142397e-06, rel=1e-7)
        assert budget.num_modes == 10**6
        assert budget.in_taylor_regime

    def test_budget_scales_as_inverse_root_modes(self):
        small = covert_budget(REFERENCE, 1e-3, 1e4).nbar_s
        large = covert_budget(REFERENCE, 1e-3, 1e8).nbar_s
        assert small / large == pytest.approx(100.0, rel=1e-9)

    def test_budget_linear_in_epsilon(self):
        lo = covert_budget(REFERENCE, 1e-4, 1e6).nbar_s
        hi = covert_budget(REFERENCE, 1e-2, 1e6).nbar_s
        assert hi / lo == pytest.approx(100.0, rel=1e-9)

    def test_out_of_regime_flagged(self):
        with pytest.warns(UserWarning):
            budget = covert_budget(REFERENCE, 0.45, 4.0)
        assert not budget.in_taylor_regime

    def test_identity_channel_degenerate(self):
        with pytest.raises(DegenerateCovertnessError):
            covert_budget(SensingScenario(1.0, 1.0, 0.3, 0.3), 1e-3, 1e6)

    def test_error_bound_closes_the_loop(self):
        budget = covert_budget(REFERENCE, 1e-3, 1e6)
        bound = willie_error_lower_bound(budget.c2, 1e6, budget.nbar_s)
        assert bound == pytest.approx(0.5 - 1e-3, abs=1e-15)

    def test_error_bound_monotone_in_signal(self):
        c2 = equal_bath_c2(0.25, 1.0)
        weak = willie_error_lower_bound(c2, 1e6, 1e-6)
        strong = willie_error_lower_bound(c2, 1e6, 1e-4)
        assert strong < weak <= 0.5

    def test_invalid_epsilon_rejected(self):
        with pytest.raises(ValueError):
            covert_budget(REFERENCE, 0.0, 1e6)
        with pytest.raises(ValueError):
            covert_budget(REFERENCE, -1e-3, 1e6)

    def test_invalid_modes_rejected(self):
        with pytest.raises(ValueError):
            covert_budget(REFERENCE, 1e-3, 0.0)
