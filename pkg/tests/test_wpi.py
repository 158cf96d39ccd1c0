import pytest

from wpimap import (
    Location,
    WellRecord,
    WpiMethod,
    build_primary_samples,
    compute_wpi_exact,
    compute_wpi_hat,
)
from wpimap.errors import DataError, EmptySeries, MissingField, NoEligibleWells


def record(well_id="W1", x=0.0, y=0.0, rate=100.0, gradient=0.8, tvd=10000.0,
           **extra):
    return WellRecord(well_id=well_id, location=Location(x, y),
                      avg_rate_90d=rate, frac_gradient=gradient, tvd=tvd,
                      **extra)


class TestExactIndex:
    def test_unit_series(self):
        assert compute_wpi_exact([(1.0, 1.0)] * 90) == 90.0

    def test_single_day(self):
        assert compute_wpi_exact([(5.0, 100.0)]) == 500.0

    def test_three_days_direct_summation(self):
        series = [(2.0, 10.0), (3.0, 20.0), (4.0, 30.0)]
        expected = sum(r * p for r, p in series)
        assert expected == 200.0
        assert compute_wpi_exact(series) == expected

    def test_empty_series(self):
        with pytest.raises(EmptySeries):
            compute_wpi_exact([])

    def test_too_long(self):
        with pytest.raises(DataError):
            compute_wpi_exact([(1.0, 1.0)] * 91)

    def test_negative_entry(self):
        with pytest.raises(DataError):
            compute_wpi_exact([(1.0, -1.0)])


class TestEstimatedIndex:
    def test_unit_case(self):
        value = compute_wpi_hat(record(rate=1.0, gradient=1.0, tvd=1.0))
        assert value.wpi == 90.0
        assert value.method is WpiMethod.ESTIMATED

    def test_direct_arithmetic(self):
        value = compute_wpi_hat(record(rate=1000.0, gradient=0.8, tvd=10000.0))
        assert value.wpi == pytest.approx(7.2e8, rel=1e-15)

    def test_missing_gradient(self):
        rec = WellRecord(well_id="W1", location=Location(0, 0),
                         avg_rate_90d=100.0, frac_gradient=None, tvd=10000.0)
        with pytest.raises(MissingField) as excinfo:
            compute_wpi_hat(rec)
        assert excinfo.value.name == "frac_gradient"

    def test_matches_exact_on_constant_series(self, rng):
        for _ in range(25):
            rate = float(rng.uniform(1, 5000))
            gradient = float(rng.uniform(0.5, 1.0))
            tvd = float(rng.uniform(5000, 15000))
            rec = record(rate=rate, gradient=gradient, tvd=tvd)
            hat = compute_wpi_hat(rec).wpi
            exact = compute_wpi_exact([(rate, gradient * tvd)] * 90)
            assert abs(hat - exact) / exact < 1e-12

    def test_degree_one_homogeneity(self):
        base = compute_wpi_hat(record(rate=123.0, gradient=0.77, tvd=9876.0)).wpi
        assert compute_wpi_hat(record(rate=246.0, gradient=0.77,
                                      tvd=9876.0)).wpi == 2.0 * base
        assert compute_wpi_hat(record(rate=123.0, gradient=1.54,
                                      tvd=9876.0)).wpi == 2.0 * base
        assert compute_wpi_hat(record(rate=123.0, gradient=0.77,
                                      tvd=19752.0)).wpi == 2.0 * base


class TestPrimarySamples:
    def test_power_of_ten(self):
        # 100 = rate * 90 * gradient * tvd with rate = 100/(90*1*1)
        rec = record(rate=100.0 / 90.0, gradient=1.0, tvd=1.0)
        build = build_primary_samples([rec])
        assert build.samples[0].value == pytest.approx(2.0, abs=1e-14)
        assert build.well_ids == ("W1",)
        assert build.ineligible == ()

    def test_mixed_eligibility_reported(self):
        good = record(well_id="GOOD")
        missing = WellRecord(well_id="NOTVD", location=Location(1, 0),
                             avg_rate_90d=50.0, frac_gradient=0.7, tvd=None)
        zero_rate = WellRecord(well_id="ZERO", location=Location(2, 0),
                               avg_rate_90d=0.0, frac_gradient=0.7, tvd=9000.0)
        build = build_primary_samples([good, missing, zero_rate])
        assert build.well_ids == ("GOOD",)
        assert dict(build.ineligible) == {"NOTVD": "missing tvd",
                                          "ZERO": "non-positive avg_rate_90d"}

    def test_all_ineligible(self):
        recs = [WellRecord(well_id=f"W{i}", location=Location(i, 0),
                           avg_rate_90d=50.0, frac_gradient=0.7, tvd=None)
                for i in range(3)]
        with pytest.raises(NoEligibleWells):
            build_primary_samples(recs)
