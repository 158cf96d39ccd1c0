import math

import numpy as np
import pytest

import oracles
from conftest import STRUCTURES, make_dataset, make_samples, random_model
from wpimap import (
    EmpiricalVariogram,
    LmcModel,
    Structure,
    VariogramBin,
    VariogramKind,
    VariogramModel,
    empirical_cross_variogram,
    empirical_variogram,
    fit_lmc,
    fit_model,
    model_value,
    range_diagnostic,
)
from wpimap.errors import (
    DataError,
    InfeasibleFit,
    InvalidLmc,
    NoPairsWithinCutoff,
    NotColocated,
    TooFewBins,
)


def line_samples(values, spacing=1.0):
    return make_samples([(i * spacing, 0.0) for i in range(len(values))], values)


class TestEmpiricalVariogram:
    def test_single_pair_definition(self):
        samples = line_samples([0.0, 2.0], spacing=10.0)
        emp = empirical_variogram(samples, cutoff=20.0, n_bins=1)
        assert emp.n_bins == 1
        assert emp.bins[0].gamma == pytest.approx(2.0)
        assert emp.bins[0].pair_count == 1
        assert emp.bins[0].lag == pytest.approx(10.0)

    def test_constant_field_zero(self):
        samples = line_samples([3.0] * 6)
        emp = empirical_variogram(samples, cutoff=6.0, n_bins=3)
        assert all(b.gamma == 0.0 for b in emp.bins)

    def test_five_point_line_against_enumeration(self):
        values = [0.0, 1.0, 0.0, 1.0, 0.0]
        samples = line_samples(values)
        emp = empirical_variogram(samples, cutoff=4.5, n_bins=4)
        points = [(i * 1.0, 0.0) for i in range(5)]
        expected = oracles.variogram_bins(points, values, 4.5, 4)
        assert emp.n_bins == len(expected) == 4
        for b, (k, (lag, gamma, count)) in zip(emp.bins, sorted(expected.items())):
            assert b.lag == pytest.approx(lag)
            assert b.gamma == pytest.approx(gamma, abs=1e-15)
            assert b.pair_count == count
        # frozen values from the hand enumeration of the 10 pairs
        assert [b.gamma for b in emp.bins] == pytest.approx([0.5, 0.0, 0.5, 0.0])

    def test_random_field_against_enumeration(self, rng):
        points = [tuple(map(float, p)) for p in rng.uniform(0, 50, (20, 2))]
        values = [float(v) for v in rng.normal(size=20)]
        samples = make_samples(points, values)
        emp = empirical_variogram(samples, cutoff=30.0, n_bins=6)
        expected = oracles.variogram_bins(points, values, 30.0, 6)
        assert [b.pair_count for b in emp.bins] == [
            c for _, (_, _, c) in sorted(expected.items())]
        for b, (_, (_, gamma, _)) in zip(emp.bins, sorted(expected.items())):
            assert b.gamma == pytest.approx(gamma, rel=1e-12)

    def test_no_pairs_within_cutoff(self):
        samples = line_samples([1.0, 2.0], spacing=100.0)
        with pytest.raises(NoPairsWithinCutoff):
            empirical_variogram(samples, cutoff=10.0, n_bins=2)

    def test_constant_shift_invariance(self, rng):
        points = [tuple(map(float, p)) for p in rng.uniform(0, 50, (15, 2))]
        values = [float(v) for v in rng.normal(size=15)]
        emp1 = empirical_variogram(make_samples(points, values), 30.0, 5)
        shifted = [v + 123.456 for v in values]
        emp2 = empirical_variogram(make_samples(points, shifted), 30.0, 5)
        for b1, b2 in zip(emp1.bins, emp2.bins):
            assert abs(b1.gamma - b2.gamma) < 1e-12

    def test_scale_by_two_exact(self, rng):
        points = [tuple(map(float, p)) for p in rng.uniform(0, 50, (15, 2))]
        values = [float(v) for v in rng.normal(size=15)]
        emp1 = empirical_variogram(make_samples(points, values), 30.0, 5)
        doubled = [2.0 * v for v in values]
        emp2 = empirical_variogram(make_samples(points, doubled), 30.0, 5)
        for b1, b2 in zip(emp1.bins, emp2.bins):
            assert b2.gamma == 4.0 * b1.gamma


class TestCrossVariogram:
    def test_self_cross_equals_direct(self, rng):
        points = [tuple(map(float, p)) for p in rng.uniform(0, 40, (12, 2))]
        values = [float(v) for v in rng.normal(size=12)]
        ds = make_dataset(points, values, values)
        cross = empirical_cross_variogram(ds, 25.0, 5)
        direct = empirical_variogram(ds.primary, 25.0, 5)
        assert cross.kind is VariogramKind.CROSS
        for cb, db in zip(cross.bins, direct.bins):
            assert cb.gamma == pytest.approx(db.gamma, rel=1e-14)

    def test_negated_secondary_flips_sign(self, rng):
        points = [tuple(map(float, p)) for p in rng.uniform(0, 40, (12, 2))]
        values = [float(v) for v in rng.normal(size=12)]
        ds = make_dataset(points, values, [-v for v in values])
        cross = empirical_cross_variogram(ds, 25.0, 5)
        direct = empirical_variogram(ds.primary, 25.0, 5)
        for cb, db in zip(cross.bins, direct.bins):
            assert cb.gamma == pytest.approx(-db.gamma, rel=1e-14)

    def test_four_point_line_against_enumeration(self):
        points = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]
        u = [0.0, 1.0, 2.0, 3.0]
        v = [1.0, 0.0, 3.0, 2.0]
        ds = make_dataset(points, u, v)
        cross = empirical_cross_variogram(ds, 3.5, 3)
        expected = oracles.cross_variogram_bins(points, u, v, 3.5, 3)
        for b, (_, (lag, gamma, count)) in zip(cross.bins, sorted(expected.items())):
            assert b.lag == pytest.approx(lag)
            assert b.gamma == pytest.approx(gamma, abs=1e-15)
            assert b.pair_count == count

    def test_requires_colocated(self):
        samples = tuple(line_samples([1.0, 2.0]))
        from wpimap import MultivariateDataset
        ds = MultivariateDataset(samples, samples, colocated=False)
        with pytest.raises(NotColocated):
            empirical_cross_variogram(ds, 5.0, 2)


class TestModelValue:
    def test_spherical_at_range(self):
        m = VariogramModel(Structure.SPHERICAL, 0.0, 1.0, 100.0)
        assert model_value(m, 100.0) == pytest.approx(1.0)
        assert model_value(m, 250.0) == pytest.approx(1.0)

    def test_zero_lag_convention(self):
        for structure in STRUCTURES:
            m = VariogramModel(structure, 0.3, 0.7, 50.0)
            assert model_value(m, 0.0) == 0.0

    def test_spherical_half_range(self):
        m = VariogramModel(Structure.SPHERICAL, 0.2, 0.8, 100.0)
        expected = 0.2 + 0.8 * (1.5 * 0.5 - 0.5 * 0.125)
        assert expected == 0.75
        assert model_value(m, 50.0) == pytest.approx(expected, abs=1e-15)

    def test_exponential_and_gaussian_at_range(self):
        e = VariogramModel(Structure.EXPONENTIAL, 0.0, 1.0, 100.0)
        g = VariogramModel(Structure.GAUSSIAN, 0.0, 1.0, 100.0)
        assert model_value(e, 100.0) == pytest.approx(1.0 - math.exp(-3.0))
        assert model_value(g, 100.0) == pytest.approx(1.0 - math.exp(-3.0))

    def test_matches_oracle_shapes(self, rng):
        for _ in range(20):
            m = random_model(rng)
            h = float(rng.uniform(0, 200))
            expected = oracles.gamma_value(m.structure.value, m.nugget,
                                           m.partial_sill, m.range_m, h)
            assert model_value(m, h) == pytest.approx(expected, rel=1e-14)

    def test_negative_lag_rejected(self):
        m = VariogramModel(Structure.SPHERICAL, 0.0, 1.0, 100.0)
        with pytest.raises(DataError):
            model_value(m, -1.0)

    def test_nondecreasing_on_grid(self, rng):
        hs = np.linspace(0.0, 400.0, 1000)
        for _ in range(15):
            m = random_model(rng)
            gammas = m.gamma(hs)
            assert np.all(np.diff(gammas) >= -1e-15)


def exact_bins(model, cutoff, n_bins=15, pair_count=40):
    """Noise-free synthetic empirical variogram sampled from a model."""
    width = cutoff / n_bins
    bins = tuple(
        VariogramBin((k + 0.5) * width, float(model.gamma((k + 0.5) * width)),
                     pair_count)
        for k in range(n_bins)
    )
    kind = VariogramKind.DIRECT
    return EmpiricalVariogram(bins, cutoff, width, kind)


class TestFitModel:
    def test_noise_free_recovery(self):
        cutoff = 300.0
        true = VariogramModel(Structure.SPHERICAL, 0.2, 0.8, 120.0)
        fit = fit_model(exact_bins(true, cutoff), Structure.SPHERICAL)
        assert fit.converged
        assert not fit.degenerate_range
        assert fit.model.nugget == pytest.approx(true.nugget, abs=0.01 * true.sill)
        assert fit.model.partial_sill == pytest.approx(true.partial_sill, rel=0.01)
        assert fit.model.range_m == pytest.approx(true.range_m, rel=0.01)

    def test_pure_nugget_degenerate(self):
        bins = tuple(VariogramBin(5.0 + 10.0 * k, 0.7, 12) for k in range(8))
        emp = EmpiricalVariogram(bins, 80.0, 10.0, VariogramKind.DIRECT)
        fit = fit_model(emp, Structure.SPHERICAL)
        assert fit.degenerate_range
        assert fit.model.sill == pytest.approx(0.7, rel=1e-6)

    def test_too_few_bins(self):
        bins = (VariogramBin(5.0, 1.0, 3), VariogramBin(15.0, 1.2, 3))
        emp = EmpiricalVariogram(bins, 20.0, 10.0, VariogramKind.DIRECT)
        with pytest.raises(TooFewBins):
            fit_model(emp, Structure.SPHERICAL)

    def test_recovery_box_property(self, rng):
        # noise-free round trips across the documented parameter box
        cutoff = 100.0
        for trial in range(50):
            structure = STRUCTURES[trial % 3]
            true = VariogramModel(
                structure,
                float(rng.uniform(0.0, 0.5)),
                float(rng.uniform(0.5, 2.0)),
                float(rng.uniform(0.2, 0.8)) * cutoff,
            )
            fit = fit_model(exact_bins(true, cutoff), structure)
            assert fit.model.nugget == pytest.approx(true.nugget,
                                                     abs=0.01 * true.sill)
            assert fit.model.partial_sill == pytest.approx(true.partial_sill,
                                                           rel=0.01)
            assert fit.model.range_m == pytest.approx(true.range_m, rel=0.01)

    def test_weights_favor_short_lags(self):
        # corrupt one long-lag bin; the short-lag fit should barely move
        cutoff = 300.0
        true = VariogramModel(Structure.EXPONENTIAL, 0.1, 1.0, 100.0)
        emp = exact_bins(true, cutoff)
        bins = list(emp.bins)
        last = bins[-1]
        bins[-1] = VariogramBin(last.lag, last.gamma * 1.5, last.pair_count)
        corrupted = EmpiricalVariogram(tuple(bins), cutoff, emp.bin_width,
                                       VariogramKind.DIRECT)
        fit = fit_model(corrupted, Structure.EXPONENTIAL)
        assert fit.model.range_m == pytest.approx(true.range_m, rel=0.15)


def lmc_exact_bins(lmc, cutoff, n_bins=15, pair_count=40):
    width = cutoff / n_bins
    lags = [(k + 0.5) * width for k in range(n_bins)]

    def emp(i, j, kind):
        bins = tuple(VariogramBin(h, float(lmc.gamma(h, i, j)), pair_count)
                     for h in lags)
        return EmpiricalVariogram(bins, cutoff, width, kind)

    return (emp(0, 0, VariogramKind.DIRECT), emp(1, 1, VariogramKind.DIRECT),
            emp(0, 1, VariogramKind.CROSS))


class TestLmc:
    def test_noise_free_recovery(self):
        cutoff = 300.0
        true = LmcModel(Structure.SPHERICAL, 120.0,
                        np.array([[0.2, 0.1], [0.1, 0.3]]),
                        np.array([[1.0, 0.6], [0.6, 0.8]]))
        emp_p, emp_s, emp_x = lmc_exact_bins(true, cutoff)
        fit = fit_lmc(emp_p, emp_s, emp_x, Structure.SPHERICAL)
        assert not fit.projected
        assert fit.lmc.range_m == pytest.approx(120.0, rel=0.02)
        assert np.allclose(fit.lmc.nugget_matrix, true.nugget_matrix,
                           rtol=0.02, atol=1e-4)
        assert np.allclose(fit.lmc.sill_matrix, true.sill_matrix,
                           rtol=0.02, atol=1e-4)

    def test_identical_secondary_rank_one(self):
        cutoff = 300.0
        model = VariogramModel(Structure.SPHERICAL, 0.15, 0.9, 110.0)
        emp = exact_bins(model, cutoff)
        cross_bins = EmpiricalVariogram(emp.bins, cutoff, emp.bin_width,
                                        VariogramKind.CROSS)
        fit = fit_lmc(emp, emp, cross_bins, Structure.SPHERICAL)
        s = fit.lmc.sill_matrix
        assert s[0, 0] == pytest.approx(s[0, 1], rel=1e-6)
        assert s[0, 0] == pytest.approx(s[1, 1], rel=1e-6)
        assert np.linalg.eigvalsh(s).min() >= -1e-10
        assert not fit.projected

    def test_excessive_cross_sill_infeasible(self):
        # cross sill 10x the direct geometric mean breaches Cauchy-Schwarz
        cutoff = 300.0
        direct = VariogramModel(Structure.SPHERICAL, 0.1, 1.0, 120.0)
        emp = exact_bins(direct, cutoff)
        scaled = tuple(VariogramBin(b.lag, 10.0 * b.gamma, b.pair_count)
                       for b in emp.bins)
        cross = EmpiricalVariogram(scaled, cutoff, emp.bin_width,
                                   VariogramKind.CROSS)
        # sanity: the implied cross coefficients exceed sqrt(s11 * s22)
        assert 10.0 * direct.partial_sill > math.sqrt(
            direct.partial_sill * direct.partial_sill)
        with pytest.raises(InfeasibleFit):
            fit_lmc(emp, emp, cross, Structure.SPHERICAL)

    def test_mild_violation_projected(self):
        cutoff = 300.0
        direct = VariogramModel(Structure.SPHERICAL, 0.1, 1.0, 120.0)
        emp = exact_bins(direct, cutoff)
        scaled = tuple(VariogramBin(b.lag, 1.2 * b.gamma, b.pair_count)
                       for b in emp.bins)
        cross = EmpiricalVariogram(scaled, cutoff, emp.bin_width,
                                   VariogramKind.CROSS)
        fit = fit_lmc(emp, emp, cross, Structure.SPHERICAL)
        assert fit.projected
        assert np.linalg.eigvalsh(fit.lmc.sill_matrix).min() >= -1e-10
        assert np.linalg.eigvalsh(fit.lmc.nugget_matrix).min() >= -1e-10

    def test_psd_validation(self):
        with pytest.raises(InvalidLmc):
            LmcModel(Structure.SPHERICAL, 100.0,
                     np.array([[0.1, 0.5], [0.5, 0.1]]),  # not PSD
                     np.eye(2))
        with pytest.raises(InvalidLmc):
            LmcModel(Structure.SPHERICAL, 100.0, np.zeros((2, 2)),
                     np.array([[1.0, 0.2], [0.3, 1.0]]))  # asymmetric

    def test_increment_matrices_psd(self, rng):
        from conftest import random_lmc
        hs = np.linspace(1.0, 400.0, 200)
        for _ in range(10):
            lmc = random_lmc(rng)
            for h1, h2 in zip(hs, hs[1:]):
                delta = np.array([
                    [lmc.gamma(h2, 0, 0) - lmc.gamma(h1, 0, 0),
                     lmc.gamma(h2, 0, 1) - lmc.gamma(h1, 0, 1)],
                    [lmc.gamma(h2, 1, 0) - lmc.gamma(h1, 1, 0),
                     lmc.gamma(h2, 1, 1) - lmc.gamma(h1, 1, 1)],
                ])
                assert np.linalg.eigvalsh(delta).min() >= -1e-10


class TestRangeDiagnostic:
    def test_identical_sets_equal_ranges(self, rng):
        points = [tuple(map(float, p)) for p in rng.uniform(0, 100, (30, 2))]
        values = [float(v) for v in rng.normal(size=30)]
        samples = make_samples(points, values)
        diag = range_diagnostic(samples, samples)
        assert diag.range_full == diag.range_colocated

    def test_subsampled_field_reports_both(self, rng):
        points = [tuple(map(float, p)) for p in rng.uniform(0, 100, (60, 2))]
        values = [float(v) for v in rng.normal(size=60)]
        full = make_samples(points, values)
        subset = full[::2]
        diag = range_diagnostic(full, subset, cutoff=50.0, n_bins=8)
        assert diag.range_full > 0
        assert diag.range_colocated > 0

    def test_too_few_points(self):
        a = line_samples([1.0, 2.0])
        with pytest.raises((TooFewBins, DataError)):
            range_diagnostic(a, a, cutoff=2.0, n_bins=4)
