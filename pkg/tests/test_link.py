"""Free-space link model: background, transmissivity, sweeps, optimization."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covertsense.errors import EmptySweepError, NearFieldError
from covertsense.link import (
    SPEED_OF_LIGHT,
    LinkGeometry,
    SweepRow,
    c_ase_at,
    find_sweep_minimum,
    geometric_transmissivity,
    mse_bound_b,
    optimize_wavelength,
    planck_occupancy,
    reproduce_paper_report,
    sweep_frequency,
)

GEOMETRY_3KM = LinkGeometry(range_m=3000.0)
GEOMETRY_5KM = LinkGeometry(range_m=5000.0)
BAND = (15e12, 100e12)


class TestPlanckOccupancy:
    def test_golden(self):
        assert planck_occupancy(9.4e-6, 300.0) == pytest.approx(
            0.0061215325765905885, rel=1e-12
        )

    def test_short_wavelength_underflows_to_zero(self):
        assert planck_occupancy(1e-9, 300.0) == 0.0

    def test_long_wavelength_rayleigh_jeans(self):
        # n -> kT lambda/(h c) for h c/(lambda k T) << 1.
        lam = 1.0e-2
        expected = 1.0 / math.expm1(6.62607015e-34 * SPEED_OF_LIGHT / (lam * 1.380649e-23 * 300.0))
        assert planck_occupancy(lam, 300.0) == pytest.approx(expected, rel=1e-12)

    @given(lam=st.floats(1e-6, 1e-4), t0=st.floats(100.0, 500.0))
    @settings(max_examples=50)
    def test_monotone_in_temperature_and_wavelength(self, lam, t0):
        assert planck_occupancy(lam, t0) < planck_occupancy(lam, t0 + 50.0)
        assert planck_occupancy(lam, t0) < planck_occupancy(lam * 1.5, t0)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            planck_occupancy(-1e-6, 300.0)
        with pytest.raises(ValueError):
            planck_occupancy(1e-6, 0.0)


class TestGeometricTransmissivity:
    def test_golden_full_aperture(self):
        geometry = LinkGeometry(range_m=3000.0, area_factor=1.0)
        assert geometric_transmissivity(6.35e-6, geometry) == pytest.approx(
            0.4351407620984417, rel=1e-12
        )

    def test_quarter_aperture_scales_by_four(self):
        full = geometric_transmissivity(6.35e-6, LinkGeometry(3000.0, area_factor=1.0))
        quarter = geometric_transmissivity(6.35e-6, GEOMETRY_3KM)
        assert quarter == pytest.approx(full / 4.0, rel=1e-12)

    def test_inverse_square_in_wavelength_and_range(self):
        base = geometric_transmissivity(8e-6, GEOMETRY_3KM)
        assert geometric_transmissivity(16e-6, GEOMETRY_3KM) == pytest.approx(
            base / 4.0, rel=1e-12
        )
        farther = LinkGeometry(range_m=6000.0)
        assert geometric_transmissivity(8e-6, farther) == pytest.approx(
            base / 4.0, rel=1e-12
        )

    def test_near_field_error_policy(self):
        geometry = LinkGeometry(range_m=1000.0, area_factor=1.0)
        with pytest.raises(NearFieldError):
            geometric_transmissivity(3e-6, geometry)

    def test_near_field_clamp_policy(self):
        geometry = LinkGeometry(range_m=1000.0, area_factor=1.0, eta_policy="clamp")
        assert geometric_transmissivity(3e-6, geometry) == geometry.eta_max

    def test_geometry_validation(self):
        with pytest.raises(ValueError):
            LinkGeometry(range_m=-1.0)
        with pytest.raises(ValueError):
            LinkGeometry(range_m=1000.0, eta_policy="ignore")
        with pytest.raises(ValueError):
            LinkGeometry(range_m=1000.0, area_factor=0.0)


class TestPointEvaluation:
    def test_c_ase_at_golden(self):
        eta, nbar_b, c_ase = c_ase_at(6.35e-6, GEOMETRY_3KM)
        assert eta == pytest.approx(0.10878519052461043, rel=1e-12)
        assert nbar_b == pytest.approx(0.0005250013814917677, rel=1e-12)
        assert c_ase == pytest.approx(2095.8939624272416, rel=1e-12)

    def test_mse_bound_golden(self):
        b = mse_bound_b(6.35e-6, GEOMETRY_3KM, 1e-3, 3e12, 1.0)
        assert b == pytest.approx(1.2100649434002795, rel=1e-12)

    def test_bound_scaling_in_integration_time(self):
        # n = floor(W T), so quadrupling T halves B.
        short = mse_bound_b(6.35e-6, GEOMETRY_3KM, 1e-3, 3e12, 1.0)
        long = mse_bound_b(6.35e-6, GEOMETRY_3KM, 1e-3, 3e12, 4.0)
        assert long == pytest.approx(short / 2.0, rel=1e-12)

    def test_bound_scaling_in_epsilon(self):
        loose = mse_bound_b(6.35e-6, GEOMETRY_3KM, 1e-2, 3e12, 1.0)
        tight = mse_bound_b(6.35e-6, GEOMETRY_3KM, 1e-3, 3e12, 1.0)
        assert tight == pytest.approx(10.0 * loose, rel=1e-12)


class TestSweep:
    def test_reference_band_minimum(self):
        rows = sweep_frequency(*BAND, 200, GEOMETRY_3KM)
        assert len(rows) == 200
        minimum = find_sweep_minimum(rows)
        assert minimum.index == 154
        assert minimum.row.lambda_m == pytest.approx(3.7112721083670295e-06, rel=1e-12)
        assert minimum.is_interior and minimum.is_unique

    def test_rows_satisfy_dispersion(self):
        rows = sweep_frequency(*BAND, 64, GEOMETRY_3KM)
        for row in rows:
            assert row.f_hz * row.lambda_m == pytest.approx(SPEED_OF_LIGHT, rel=1e-9)

    def test_background_falls_and_coupling_rises_with_frequency(self):
        rows = [r for r in sweep_frequency(*BAND, 64, GEOMETRY_3KM) if r.valid]
        for earlier, later in zip(rows, rows[1:]):
            assert later.nbar_b < earlier.nbar_b
            assert later.eta > earlier.eta

    def test_b_column_consistent_with_bound(self):
        rows = sweep_frequency(*BAND, 16, GEOMETRY_3KM, epsilon=1e-2)
        for row in rows:
            if row.valid:
                want = mse_bound_b(row.lambda_m, GEOMETRY_3KM, 1e-2, 3e12, 1.0)
                assert row.b == pytest.approx(want, rel=1e-12)

    def test_near_field_rows_flagged_not_fatal(self):
        geometry = LinkGeometry(range_m=1000.0, area_factor=1.0)
        rows = sweep_frequency(*BAND, 50, geometry)
        flagged = [r for r in rows if r.flag == "near-field"]
        assert len(flagged) == 44
        assert all(r.eta is None and r.c_ase is None for r in flagged)
        assert all(r.nbar_b > 0.0 for r in flagged)

    def test_fully_invalid_band_raises(self):
        geometry = LinkGeometry(range_m=1000.0, area_factor=1.0)
        with pytest.raises(EmptySweepError):
            sweep_frequency(200e12, 300e12, 20, geometry)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            sweep_frequency(1e14, 1e13, 10, GEOMETRY_3KM)
        with pytest.raises(ValueError):
            sweep_frequency(1e13, 1e14, 1, GEOMETRY_3KM)


class TestFindSweepMinimum:
    @staticmethod
    def _row(f: float, c_ase: float | None, flag: str = "") -> SweepRow:
        lam = SPEED_OF_LIGHT / f
        if c_ase is None:
            return SweepRow(f, lam, None, 0.01, None, None, flag)
        return SweepRow(f, lam, 0.5, 0.01, c_ase, c_ase)

    def test_interior_unique(self):
        rows = [self._row(1e13 * (i + 1), c) for i, c in enumerate([5.0, 3.0, 1.0, 2.0, 4.0])]
        minimum = find_sweep_minimum(rows)
        assert minimum.index == 2
        assert minimum.is_interior and minimum.is_unique

    def test_edge_minimum_not_interior(self):
        rows = [self._row(1e13 * (i + 1), c) for i, c in enumerate([1.0, 2.0, 3.0])]
        minimum = find_sweep_minimum(rows)
        assert minimum.index == 0
        assert not minimum.is_interior

    def test_minimum_beside_flagged_row_not_interior(self):
        rows = [
            self._row(1e13, None, "near-field"),
            self._row(2e13, 1.0),
            self._row(3e13, 2.0),
        ]
        minimum = find_sweep_minimum(rows)
        assert minimum.index == 1
        assert not minimum.is_interior

    def test_two_local_minima_not_unique(self):
        values = [3.0, 1.0, 4.0, 2.0, 5.0]
        rows = [self._row(1e13 * (i + 1), c) for i, c in enumerate(values)]
        minimum = find_sweep_minimum(rows)
        assert minimum.index == 1
        assert not minimum.is_unique

    def test_all_invalid_raises(self):
        rows = [self._row(1e13, None, "near-field")]
        with pytest.raises(EmptySweepError):
            find_sweep_minimum(rows)


class TestOptimizeWavelength:
    def test_golden_3km(self):
        lam, c_ase, b = optimize_wavelength(
            GEOMETRY_3KM, (3e-6, 2e-5), epsilon=1e-3, bandwidth=3e12, integration_time=1.0
        )
        assert lam == pytest.approx(3.719418887857133e-06, rel=1e-9)
        assert c_ase == pytest.approx(1112.551200906698, rel=1e-9)
        assert b == pytest.approx(0.6423317353307236, rel=1e-9)

    def test_golden_5km(self):
        lam, c_ase, b = optimize_wavelength(
            GEOMETRY_5KM, (3e-6, 2e-5), epsilon=1e-3, bandwidth=3e12, integration_time=1.0
        )
        assert lam == pytest.approx(3.96981575706591e-06, rel=1e-9)
        assert c_ase == pytest.approx(25835.299609558373, rel=1e-9)
        assert b == pytest.approx(14.91601718417316, rel=1e-9)

    def test_deterministic(self):
        first = optimize_wavelength(GEOMETRY_3KM, (3e-6, 2e-5))
        second = optimize_wavelength(GEOMETRY_3KM, (3e-6, 2e-5))
        assert first == second

    def test_agrees_with_sweep_location(self):
        lam, c_ase, _ = optimize_wavelength(GEOMETRY_3KM, (3e-6, 2e-5))
        rows = sweep_frequency(*BAND, 200, GEOMETRY_3KM)
        minimum = find_sweep_minimum(rows)
        grid_spacing = abs(rows[minimum.index].lambda_m - rows[minimum.index - 1].lambda_m)
        assert abs(lam - minimum.row.lambda_m) < grid_spacing
        assert c_ase <= minimum.row.c_ase

    def test_refines_below_micron_scale(self):
        lam, _, _ = optimize_wavelength(GEOMETRY_3KM, (3e-6, 2e-5))
        nudged, _, _ = optimize_wavelength(GEOMETRY_3KM, (3.1e-6, 1.9e-5))
        assert abs(lam - nudged) < 1e-9

    def test_invalid_bracket_raises(self):
        geometry = LinkGeometry(range_m=1000.0, area_factor=1.0)
        with pytest.raises(EmptySweepError):
            optimize_wavelength(geometry, (1e-6, 2e-6))


@pytest.fixture(scope="module")
def report():
    return reproduce_paper_report()


class TestReproduceReport:
    def test_sweeps_all_conventions(self, report):
        combos = {(c.area_factor, c.eta_policy) for c in report.conventions}
        assert combos == {
            (af, policy)
            for af in (1.0, 0.5, 0.25)
            for policy in ("error", "clamp")
        }

    def test_every_target_scored_everywhere(self, report):
        for convention in report.conventions:
            assert len(convention.results) == 5
            kinds = [t.kind for t in convention.results]
            assert kinds.count("optimize") == 3
            assert kinds.count("fixed") == 2
            for target in convention.results:
                scored = target.b_rel_err is not None
                assert scored or target.flag, (
                    f"{convention.area_factor}/{convention.eta_policy} "
                    f"{target.label} has neither residuals nor a reason flag"
                )

    def test_matched_consistent_with_flags(self, report):
        if report.matched is None:
            assert all(not c.matches_all for c in report.conventions)
        else:
            assert report.matched.matches_all
            assert all(t.matches for t in report.matched.results)

    def test_match_flags_respect_tolerances(self, report):
        for convention in report.conventions:
            for target in convention.results:
                if not target.matches:
                    continue
                assert target.b_rel_err is not None
                assert abs(target.b_rel_err) <= report.b_rel_tolerance
                if target.kind == "optimize":
                    assert abs(target.d_lambda_m) <= report.lambda_tolerance_m
