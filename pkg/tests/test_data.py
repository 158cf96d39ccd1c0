import math

import numpy as np
import pytest

import oracles
from wpimap import (
    Location,
    MultivariateDataset,
    SpatialSample,
    colocate,
    ingest_csv,
    log10_transform,
    pearson_correlation,
    write_wells_csv,
)
from wpimap.errors import (
    AmbiguousMatch,
    DataError,
    DegenerateVariance,
    DuplicateLocation,
    DuplicateWellId,
    MissingColumn,
    MissingInput,
    NonPositiveValue,
    NotColocated,
    ParseFailure,
)

HEADER = "well_id,x,y,avg_rate_90d,frac_gradient,tvd,fluid_volume,proppant_volume"


def write_csv(path, rows):
    path.write_text("\n".join([HEADER, *rows]) + "\n", encoding="utf-8")
    return path


class TestIngest:
    def test_three_clean_rows(self, tmp_path):
        path = write_csv(tmp_path / "wells.csv", [
            "A,0,0,100,0.7,9000,1e6,2e6",
            "B,10,0,200,0.8,9500,1.5e6,2.5e6",
            "C,0,10,300,0.9,10000,2e6,3e6",
        ])
        result = ingest_csv(path)
        assert len(result.records) == 3
        assert not result.issues
        assert result.records[1].well_id == "B"
        assert result.records[1].location == Location(10.0, 0.0)
        assert result.records[2].fluid_volume == 2e6

    def test_empty_optional_field_warns(self, tmp_path, caplog):
        path = write_csv(tmp_path / "wells.csv", [
            "A,0,0,100,0.7,9000,,2e6",
        ])
        with caplog.at_level("WARNING"):
            result = ingest_csv(path)
        assert len(result.records) == 1
        assert result.records[0].fluid_volume is None
        assert [i for i in result.warnings if i.column == "fluid_volume"]
        assert "fluid_volume" in caplog.text

    def test_unparseable_tvd_raises(self, tmp_path):
        path = write_csv(tmp_path / "wells.csv", [
            "A,0,0,100,0.7,9000,1e6,2e6",
            "B,10,0,200,0.8,abc,1e6,2e6",
        ])
        with pytest.raises(ParseFailure) as excinfo:
            ingest_csv(path)
        assert excinfo.value.row == 3
        assert excinfo.value.column == "tvd"

    def test_missing_column(self, tmp_path):
        path = tmp_path / "wells.csv"
        path.write_text("well_id,x\nA,0\n", encoding="utf-8")
        with pytest.raises(MissingColumn):
            ingest_csv(path)

    def test_duplicate_well_id(self, tmp_path):
        path = write_csv(tmp_path / "wells.csv", [
            "A,0,0,100,0.7,9000,1e6,2e6",
            "A,10,0,200,0.8,9500,1e6,2e6",
        ])
        with pytest.raises(DuplicateWellId):
            ingest_csv(path)

    def test_duplicate_location(self, tmp_path):
        path = write_csv(tmp_path / "wells.csv", [
            "A,0,0,100,0.7,9000,1e6,2e6",
            "B,0,0,200,0.8,9500,1e6,2e6",
        ])
        with pytest.raises(DuplicateLocation):
            ingest_csv(path)

    def test_missing_required_reported_not_dropped_silently(self, tmp_path):
        path = write_csv(tmp_path / "wells.csv", [
            "A,0,0,100,0.7,9000,1e6,2e6",
            ",5,5,200,0.8,9500,1e6,2e6",
        ])
        result = ingest_csv(path)
        assert len(result.records) == 1
        assert len(result.skipped) == 1
        assert result.skipped[0].row == 3

    def test_negative_value_rejected(self, tmp_path):
        path = write_csv(tmp_path / "wells.csv", [
            "A,0,0,-5,0.7,9000,1e6,2e6",
        ])
        with pytest.raises(ParseFailure):
            ingest_csv(path)

    def test_missing_input_path(self, tmp_path):
        with pytest.raises(MissingInput):
            ingest_csv(tmp_path / "nope.csv")

    def test_schema_remap(self, tmp_path):
        path = tmp_path / "wells.csv"
        path.write_text("id,east,north,rate,grad,depth\nA,1,2,100,0.7,9000\n",
                        encoding="utf-8")
        schema = {"well_id": "id", "x": "east", "y": "north",
                  "avg_rate_90d": "rate", "frac_gradient": "grad",
                  "tvd": "depth"}
        result = ingest_csv(path, schema)
        rec = result.records[0]
        assert rec.location == Location(1.0, 2.0)
        assert rec.tvd == 9000
        assert rec.fluid_volume is None

    def test_roundtrip_preserves_numerics(self, tmp_path, rng):
        rows = []
        for i in range(20):
            x, y = (float(v) for v in rng.uniform(0, 1e4, 2))
            rate = float(rng.uniform(10, 5000))
            grad = float(rng.uniform(0.5, 1.0))
            tvd = float(rng.uniform(8000, 14000))
            fluid = float(rng.uniform(1e5, 1e7))
            rows.append(f"W{i},{x!r},{y!r},{rate!r},{grad!r},{tvd!r},{fluid!r},")
        path = write_csv(tmp_path / "wells.csv", rows)
        records = ingest_csv(path).records
        out = tmp_path / "back.csv"
        write_wells_csv(records, out)
        again = ingest_csv(out).records
        for a, b in zip(records, again):
            assert a == b  # shortest round-trip floats are exact


class TestLog10Transform:
    def test_power_of_ten(self):
        out = log10_transform([SpatialSample(Location(0, 0), 100.0)])
        assert out[0].value == 2.0
        assert out[0].location == Location(0, 0)

    def test_identity_of_log(self):
        out = log10_transform([SpatialSample(Location(0, 0), 1.0)])
        assert out[0].value == 0.0

    def test_zero_raises(self):
        with pytest.raises(NonPositiveValue):
            log10_transform([SpatialSample(Location(3, 4), 0.0)])

    def test_inverse_of_pow10(self, rng):
        values = rng.uniform(-5, 5, 50)
        samples = [SpatialSample(Location(float(i), 0.0), float(10.0 ** v))
                   for i, v in enumerate(values)]
        out = log10_transform(samples)
        for got, want in zip(out, values):
            assert got.value == pytest.approx(float(want), rel=1e-12)


class TestColocate:
    def make(self, coords, values):
        return [SpatialSample(Location(x, y), v)
                for (x, y), v in zip(coords, values)]

    def test_identical_lists_all_retained(self):
        coords = [(0, 0), (1, 0), (2, 0)]
        primary = self.make(coords, [1, 2, 3])
        secondary = self.make(coords, [4, 5, 6])
        result = colocate(primary, secondary)
        assert result.dataset.n == 3
        assert result.dropped_primary == 0
        assert result.dropped_secondary == 0
        assert result.dataset.colocated

    def test_partial_overlap(self):
        p_coords = [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]
        s_coords = p_coords + [(9, 9), (8, 8), (7, 7)]
        primary = self.make(p_coords, range(5))
        secondary = self.make(s_coords, range(8))
        result = colocate(primary, secondary)
        assert result.dataset.n == 5
        assert result.dropped_primary == 0
        assert result.dropped_secondary == 3

    def test_ambiguous_match(self):
        primary = self.make([(0, 0)], [1])
        secondary = self.make([(0.1, 0), (0, 0.1)], [2, 3])
        with pytest.raises(AmbiguousMatch):
            colocate(primary, secondary, tolerance=0.5)

    def test_idempotent(self, rng):
        coords = [(float(x), float(y)) for x, y in rng.uniform(0, 10, (12, 2))]
        primary = self.make(coords[:8], rng.normal(size=8))
        secondary = self.make(coords[2:], rng.normal(size=10))
        first = colocate(primary, secondary).dataset
        second = colocate(first.primary, first.secondary).dataset
        assert second == first

    def test_tolerance_snaps_secondary(self):
        primary = self.make([(0, 0)], [1])
        secondary = self.make([(0.4, 0)], [2])
        result = colocate(primary, secondary, tolerance=1.0)
        assert result.dataset.secondary[0].location == Location(0, 0)

    def test_negative_tolerance(self):
        with pytest.raises(DataError):
            colocate([], [], tolerance=-1)


class TestPearson:
    def pairs_dataset(self, pairs):
        coords = [(float(i), 0.0) for i in range(len(pairs))]
        primary = [SpatialSample(Location(x, y), float(u))
                   for (x, y), (u, _) in zip(coords, pairs)]
        secondary = [SpatialSample(Location(x, y), float(v))
                     for (x, y), (_, v) in zip(coords, pairs)]
        return MultivariateDataset(tuple(primary), tuple(secondary),
                                   colocated=True)

    def test_perfect_positive(self):
        ds = self.pairs_dataset([(1, 2), (2, 4), (3, 6)])
        assert pearson_correlation(ds) == pytest.approx(1.0, abs=1e-12)

    def test_perfect_negative(self):
        ds = self.pairs_dataset([(1, 3), (2, 1), (3, -1)])
        assert pearson_correlation(ds) == pytest.approx(-1.0, abs=1e-12)

    def test_four_pairs_against_direct_formula(self):
        pairs = [(0, 0), (1, 1), (2, 0), (3, 1)]
        expected = oracles.pearson(pairs)
        assert expected == pytest.approx(1.0 / math.sqrt(5.0), abs=1e-15)
        ds = self.pairs_dataset(pairs)
        assert pearson_correlation(ds) == pytest.approx(expected, abs=1e-14)

    def test_degenerate_variance(self):
        ds = self.pairs_dataset([(1, 1), (1, 2), (1, 3)])
        with pytest.raises(DegenerateVariance):
            pearson_correlation(ds)

    def test_not_colocated(self):
        primary = (SpatialSample(Location(0, 0), 1.0),
                   SpatialSample(Location(1, 0), 2.0))
        ds = MultivariateDataset(primary, primary, colocated=False)
        with pytest.raises(NotColocated):
            pearson_correlation(ds)

    def test_affine_invariance(self, rng):
        pairs = [(float(u), float(v)) for u, v in rng.normal(size=(30, 2))]
        base = pearson_correlation(self.pairs_dataset(pairs))
        scaled = [(3.5 * u + 7.0, 0.25 * v - 2.0) for u, v in pairs]
        assert pearson_correlation(self.pairs_dataset(scaled)) == pytest.approx(
            base, abs=1e-12)


class TestDatasetInvariants:
    def test_duplicate_primary_locations_rejected(self):
        s = SpatialSample(Location(0, 0), 1.0)
        with pytest.raises(DuplicateLocation):
            MultivariateDataset((s, s), (s, s), colocated=True)

    def test_colocated_length_mismatch(self):
        a = SpatialSample(Location(0, 0), 1.0)
        b = SpatialSample(Location(1, 0), 2.0)
        with pytest.raises(DataError):
            MultivariateDataset((a, b), (a,), colocated=True)

    def test_colocated_location_mismatch(self):
        a = SpatialSample(Location(0, 0), 1.0)
        b = SpatialSample(Location(1, 0), 2.0)
        with pytest.raises(DataError):
            MultivariateDataset((a,), (b,), colocated=True)

    def test_nonfinite_value_rejected(self):
        with pytest.raises(DataError):
            SpatialSample(Location(0, 0), float("nan"))

    def test_nonfinite_coordinates_rejected(self):
        with pytest.raises(DataError):
            Location(float("inf"), 0.0)
