import numpy as np
import pytest

from wvar.empirical_dist import EmpiricalDistribution
from wvar.risk_measures import (
    RiskReport,
    WeightingMeasure,
    risk_report,
    tail_var_exact,
    tail_var_simpson,
    value_at_risk,
    weighted_var,
    weighted_var_uniform_closed_form,
    worst_case_loss,
)

FOUR_ATOMS = EmpiricalDistribution.from_samples([2, -3, 0, -1])


def random_sample(rng, size=None):
    n = size if size is not None else int(rng.integers(4, 400))
    scale = rng.uniform(0.002, 0.05)
    loc = rng.normal(0.0, 0.01)
    data = rng.normal(loc, scale, size=n)
    if rng.random() < 0.3:
        data = data - rng.exponential(scale, size=n) * (rng.random(n) < 0.2)
    return data


class TestValueAtRisk:
    def test_four_atom_example(self):
        # q_{0.05} = -3 by atom enumeration, negated
        assert value_at_risk(FOUR_ATOMS, 0.05) == 3.0

    def test_degenerate_distribution(self):
        zeros = EmpiricalDistribution.from_samples([0.0] * 10)
        for level in (0.01, 0.5, 0.95):
            assert value_at_risk(zeros, level) == 0.0

    def test_translation_shifts_by_minus_a(self):
        rng = np.random.default_rng(5)
        data = rng.normal(size=40)
        shift = 0.37
        base = EmpiricalDistribution.from_samples(data)
        shifted = EmpiricalDistribution.from_samples(data + shift)
        for level in (0.05, 0.3, 0.9):
            assert value_at_risk(shifted, level) == pytest.approx(
                value_at_risk(base, level) - shift, abs=1e-12
            )

    def test_level_bounds(self):
        for bad in (0.0, 1.0, -0.2, 1.2):
            with pytest.raises(ValueError):
                value_at_risk(FOUR_ATOMS, bad)


class TestTailVarExact:
    def test_quarter_level(self):
        # integral over [0, 0.25] is 0.25 * (-3); -(1/0.25) * (-0.75) = 3
        assert tail_var_exact(FOUR_ATOMS, 0.25) == 3.0

    def test_half_level(self):
        # 0.25*(-3) + 0.25*(-1) = -1; -(1/0.5)*(-1) = 2
        assert tail_var_exact(FOUR_ATOMS, 0.5) == 2.0

    def test_full_level_is_negated_mean(self):
        # sample mean is -0.5, so the level-1 value is +0.5: sign preserved, no clamping
        assert tail_var_exact(FOUR_ATOMS, 1.0) == 0.5

    def test_level_bounds(self):
        for bad in (0.0, -0.5, 1.0001):
            with pytest.raises(ValueError):
                tail_var_exact(FOUR_ATOMS, bad)

    def test_vectorized_levels(self):
        out = tail_var_exact(FOUR_ATOMS, np.array([0.25, 0.5, 1.0]))
        assert np.allclose(out, [3.0, 2.0, 0.5])

    def test_fractional_atom(self):
        # lam = 0.4: full atom (-3)/4 plus 0.15 * (-1); -(1/0.4)*(-0.9) = 2.25
        assert tail_var_exact(FOUR_ATOMS, 0.4) == pytest.approx(2.25, abs=1e-15)


class TestWorstCaseLoss:
    def test_four_atom(self):
        assert worst_case_loss(FOUR_ATOMS) == 3.0

    def test_all_positive_sample_is_negative(self):
        assert worst_case_loss(EmpiricalDistribution.from_samples([1, 2])) == -1.0

    def test_continuity_with_tail_var(self):
        assert tail_var_exact(FOUR_ATOMS, 1e-9) == pytest.approx(3.0, abs=1e-12)


class TestTailVarSimpson:
    def test_quarter_level_against_exact(self):
        value = tail_var_simpson(FOUR_ATOMS, 0.25, inner_panels=128)
        assert value == pytest.approx(3.0, abs=0.05)

    def test_constant_distribution_exact(self):
        const = EmpiricalDistribution.from_samples([0.7] * 5)
        for level in (0.1, 0.5, 1.0):
            assert tail_var_simpson(const, level) == pytest.approx(-0.7, abs=1e-15)

    def test_agreement_with_exact_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            data = random_sample(rng)
            dist = EmpiricalDistribution.from_samples(data)
            level = rng.uniform(0.02, 1.0)
            panels = 128
            bound = 2.0 * (data.max() - data.min()) / panels
            assert abs(
                tail_var_simpson(dist, level, panels) - tail_var_exact(dist, level)
            ) <= bound


class TestWeightedVar:
    def test_uniform_four_atom(self):
        assert weighted_var(FOUR_ATOMS) == pytest.approx(1.9712, abs=0.02)

    def test_single_atom_reduces_to_tail_var(self):
        measure = WeightingMeasure.single_atom(0.05)
        assert weighted_var(FOUR_ATOMS, measure) == pytest.approx(
            tail_var_exact(FOUR_ATOMS, 0.05), abs=1e-15
        )

    def test_constant_distribution(self):
        const = EmpiricalDistribution.from_samples([0.3] * 4)
        assert weighted_var(const) == pytest.approx(-0.3, abs=1e-12)

    def test_atoms_are_exact_mixture(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            dist = EmpiricalDistribution.from_samples(random_sample(rng))
            k = int(rng.integers(1, 6))
            levels = rng.uniform(0.01, 1.0, size=k)
            weights = rng.dirichlet(np.ones(k))
            measure = WeightingMeasure.from_atoms(list(zip(levels, weights)))
            expected = sum(
                w * tail_var_exact(dist, lam) for lam, w in zip(levels, weights)
            )
            assert weighted_var(dist, measure) == pytest.approx(expected, abs=1e-12)

    def test_density_measure_close_to_uniform_for_flat_density(self):
        measure = WeightingMeasure.from_density(np.ones(65))
        value = weighted_var(FOUR_ATOMS, measure)
        assert value == pytest.approx(weighted_var_uniform_closed_form(FOUR_ATOMS), abs=0.05)

    def test_density_measure_tilts_toward_tail(self):
        # density concentrated near 0 pushes the value toward the worst-case loss
        grid = np.linspace(0.0, 1.0, 65)
        steep = WeightingMeasure.from_density(np.exp(-30.0 * grid))
        assert weighted_var(FOUR_ATOMS, steep) > weighted_var(FOUR_ATOMS)


class TestClosedForm:
    def test_four_atom_value(self):
        # weights are the F-differences 0.59657, 0.25, 0.11919, 0.03424 (sum 1)
        assert weighted_var_uniform_closed_form(FOUR_ATOMS) == pytest.approx(
            1.9712438795175895, abs=1e-12
        )

    def test_reverified_by_fine_grid_double_integration(self):
        # independent oracle: midpoint rule over the level on a fine grid, with
        # the inner tail integral evaluated exactly
        rng = np.random.default_rng(8)
        fixtures = [FOUR_ATOMS.sorted_samples] + [random_sample(rng) for _ in range(4)]
        for data in fixtures:
            dist = EmpiricalDistribution.from_samples(data)
            m = 200_001
            levels = (np.arange(m) + 0.5) / m
            oracle = float(np.mean(tail_var_exact(dist, levels)))
            assert weighted_var_uniform_closed_form(dist) == pytest.approx(oracle, abs=1e-6)

    def test_constant_distribution_exact(self):
        const = EmpiricalDistribution.from_samples([0.42] * 7)
        assert weighted_var_uniform_closed_form(const) == pytest.approx(-0.42, abs=1e-15)

    def test_translation_cash_additivity(self):
        rng = np.random.default_rng(9)
        data = rng.normal(size=30)
        shift = 1.234
        base = weighted_var_uniform_closed_form(EmpiricalDistribution.from_samples(data))
        shifted = weighted_var_uniform_closed_form(
            EmpiricalDistribution.from_samples(data + shift)
        )
        assert shifted == pytest.approx(base - shift, abs=1e-12)


class TestWeightingMeasureValidation:
    def test_atom_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            WeightingMeasure.from_atoms([(0.5, 0.6), (0.9, 0.5)])

    def test_atom_levels_in_unit_interval(self):
        with pytest.raises(ValueError):
            WeightingMeasure.from_atoms([(0.0, 1.0)])
        with pytest.raises(ValueError):
            WeightingMeasure.from_atoms([(1.1, 1.0)])

    def test_density_must_be_nonnegative(self):
        values = np.ones(65)
        values[3] = -0.1
        with pytest.raises(ValueError):
            WeightingMeasure.from_density(values)

    def test_density_grid_must_be_odd(self):
        with pytest.raises(ValueError):
            WeightingMeasure.from_density(np.ones(64))

    def test_density_normalization(self):
        measure = WeightingMeasure.from_density(np.full(65, 3.7))
        assert np.allclose(measure.density_values, 1.0)

    def test_unnormalized_density_rejected(self):
        with pytest.raises(ValueError):
            WeightingMeasure("density", density_values=np.full(65, 3.7))


def scenario_pair(rng):
    n = int(rng.integers(4, 300))
    x = random_sample(rng, size=n)
    y = random_sample(rng, size=n)
    return x, y


def both_measures(rng):
    """A Tail-V@R at a random level and a Weighted-V@R, as callables on samples."""
    level = rng.uniform(0.01, 1.0)
    if rng.random() < 0.5:
        measure = WeightingMeasure.uniform()
    else:
        k = int(rng.integers(1, 4))
        levels = rng.uniform(0.05, 1.0, size=k)
        measure = WeightingMeasure.from_atoms(zip(levels, rng.dirichlet(np.ones(k))))
    tvar = lambda data: float(tail_var_exact(EmpiricalDistribution.from_samples(data), level))
    wvar = lambda data: weighted_var(EmpiricalDistribution.from_samples(data), measure)
    return tvar, wvar


class TestCoherence:
    """Axioms checked per-scenario: samples of equal length share scenarios."""

    def test_dominance_over_var(self):
        rng = np.random.default_rng(10)
        for _ in range(500):
            data = random_sample(rng)
            dist = EmpiricalDistribution.from_samples(data)
            level = rng.uniform(1e-4, 1.0 - 1e-4)
            assert tail_var_exact(dist, level) >= value_at_risk(dist, level) - 1e-12

    def test_subadditivity(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            x, y = scenario_pair(rng)
            for rho in both_measures(rng):
                assert rho(x + y) <= rho(x) + rho(y) + 1e-9

    def test_positive_homogeneity(self):
        rng = np.random.default_rng(12)
        for _ in range(500):
            x, _ = scenario_pair(rng)
            h = rng.uniform(0.01, 50.0)
            for rho in both_measures(rng):
                assert abs(rho(h * x) - h * rho(x)) <= 1e-9 * h

    def test_translation_invariance(self):
        rng = np.random.default_rng(13)
        for _ in range(500):
            x, _ = scenario_pair(rng)
            a = rng.uniform(-0.5, 0.5)
            for rho in both_measures(rng):
                assert abs(rho(x + a) - (rho(x) - a)) <= 1e-9

    def test_monotonicity(self):
        rng = np.random.default_rng(14)
        for _ in range(500):
            x, _ = scenario_pair(rng)
            y = x + rng.exponential(0.01, size=x.size)  # y >= x scenario-wise
            for rho in both_measures(rng):
                assert rho(x) >= rho(y) - 1e-12


def test_uniform_simpson_matches_closed_form_within_bound():
    rng = np.random.default_rng(15)
    panels = 64
    for _ in range(500):
        data = random_sample(rng)
        dist = EmpiricalDistribution.from_samples(data)
        bound = 2.0 * (data.max() - data.min()) / panels
        assert abs(
            weighted_var(dist, outer_panels=panels) - weighted_var_uniform_closed_form(dist)
        ) <= bound


def test_risk_report_carries_all_three_measures():
    report = risk_report(FOUR_ATOMS, 0.05)
    assert report.var == 3.0
    assert report.tvar == pytest.approx(3.0, abs=1e-15)
    assert report.wvar == pytest.approx(1.9712, abs=0.02)
    assert report.level == 0.05
    assert report.measure.kind == "uniform"


def test_risk_report_rejects_dominance_violation():
    with pytest.raises(ValueError):
        RiskReport(var=2.0, tvar=1.0, wvar=1.0, level=0.5, measure=WeightingMeasure.uniform())
