import itertools
import math

import numpy as np
import pytest

from mickit.density import two_block_density
from mickit.estimators import (
    BPolicy,
    SampleData,
    budget_keys,
    char_matrix_approx,
    char_matrix_brute,
    char_matrix_e,
    i_star_equi,
    mic_approx,
    mic_brute,
    mic_e,
)
from mickit.info import DiscreteJoint, mutual_information
from mickit.partition import equipartition_counts

INDEPENDENCE_4 = SampleData([1, 1, 2, 2], [1, 2, 1, 2])


def _labels_mi(a, b):
    a, b = np.asarray(a), np.asarray(b)
    counts = np.zeros((a.max() + 1, b.max() + 1))
    np.add.at(counts, (a, b), 1)
    return mutual_information(DiscreteJoint(counts / counts.sum()))


class TestSampleData:
    @pytest.mark.parametrize("bad", [[np.nan, 1.0], [np.inf, 1.0]])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(ValueError):
            SampleData(bad, [0.0, 1.0])

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            SampleData([1, 2, 3], [1, 2])

    def test_statistics_need_four_points(self):
        with pytest.raises(ValueError):
            mic_e(SampleData([1, 2, 3], [1, 2, 3]))


class TestBudget:
    def test_policy_values(self):
        assert BPolicy()(100) == 16
        assert BPolicy()(4) == 4
        assert BPolicy(alpha=0.5).effective(10) == 4

    def test_rejects_alpha_outside_unit_interval(self):
        with pytest.raises(ValueError):
            BPolicy(alpha=1.0)

    def test_budget_eight_keys(self):
        policy = BPolicy(alpha=0.5, floor=8)
        assert policy.effective(20) == 8
        keys = set(char_matrix_e(SampleData(np.arange(20.0), np.arange(20.0) ** 2), policy).entries)
        assert keys == {(2, 2), (2, 3), (3, 2), (2, 4), (4, 2)}
        assert set(budget_keys(8)) == keys


class TestIStarEqui:
    def test_noiseless_two_by_two_is_log2(self):
        x = np.arange(100.0)
        assert i_star_equi(SampleData(x, x), 2, 2) == pytest.approx(math.log(2), abs=1e-14)

    def test_independence_pattern_is_zero(self):
        assert i_star_equi(INDEPENDENCE_4, 2, 2) == 0.0

    @pytest.mark.parametrize("k,l", [(2, 3), (3, 2), (2, 5), (3, 4)])
    def test_matches_exhaustive_search_at_n30(self, k, l):
        rng = np.random.default_rng(k * 10 + l)
        x = rng.random(30)
        y = x + 0.3 * rng.standard_normal(30)
        sample = SampleData(x, y)
        # the axis with more parts is equipartitioned, the other searched exhaustively
        if k <= l:
            fixed, free, parts, budget = x, y, l, k
        else:
            fixed, free, parts, budget = y, x, k, l
        fixed_lab = equipartition_counts(fixed, parts).assign(fixed)
        order = np.argsort(free)
        best = 0.0
        for r in range(budget):
            for cuts in itertools.combinations(range(1, 30), r):
                lab = np.empty(30, dtype=int)
                lab[order] = np.searchsorted(np.array(cuts), np.arange(30), side="right")
                best = max(best, _labels_mi(lab, fixed_lab))
        assert i_star_equi(sample, k, l) == pytest.approx(best, abs=1e-12)

    def test_constant_axis_warns_and_gives_zero(self):
        with pytest.warns(UserWarning):
            assert i_star_equi(SampleData(np.ones(10), np.arange(10.0)), 2, 2) == 0.0

    def test_grid_larger_than_sample_rejected(self):
        with pytest.raises(ValueError):
            i_star_equi(INDEPENDENCE_4, 2, 3)


class TestMicFamily:
    @pytest.mark.parametrize("n", [4, 10, 100, 1000])
    def test_noiseless_monotone_is_one(self, n):
        x = np.linspace(-1, 1, n)
        sample = SampleData(x, np.exp(x))
        assert mic_e(sample) == 1.0
        assert mic_approx(sample) == 1.0

    def test_noiseless_brute_is_one(self):
        x = np.arange(8.0)
        assert mic_brute(SampleData(x, x**3)) == 1.0

    def test_independence_pattern(self):
        policy = BPolicy(floor=4)
        assert mic_e(INDEPENDENCE_4, policy) == 0.0
        assert mic_brute(INDEPENDENCE_4, policy) == 0.0
        assert set(char_matrix_e(INDEPENDENCE_4, policy).entries) == {(2, 2)}

    def test_argmax_reported(self):
        x = np.arange(50.0)
        value, key = mic_e(SampleData(x, x), return_argmax=True)
        assert value == 1.0 and key == (2, 2)

    def test_entries_in_unit_interval(self):
        rng = np.random.default_rng(3)
        sample = SampleData(rng.random(200), rng.random(200))
        for cm in (char_matrix_e(sample), char_matrix_approx(sample)):
            assert all(0.0 <= v <= 1.0 for v in cm.entries.values())

    def test_bounded_by_exhaustive_search(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            n = int(rng.integers(4, 13))
            x = rng.integers(0, 6, n).astype(float) if rng.random() < 0.3 else rng.random(n)
            y = x + rng.normal(0, rng.choice([0.1, 1.0]), n)
            sample = SampleData(x, y)
            full = char_matrix_brute(sample)
            equi = char_matrix_e(sample)
            approx = char_matrix_approx(sample)
            for key, v in equi.entries.items():
                assert v <= full.entries[key] + 1e-12
                assert approx.entries[key] <= full.entries[key] + 1e-12
            assert mic_e(sample) <= mic_brute(sample) + 1e-12
            assert mic_approx(sample) <= mic_brute(sample) + 1e-12

    def test_brute_rejects_large_n(self):
        with pytest.raises(ValueError):
            mic_brute(SampleData(np.arange(13.0), np.arange(13.0)))

    def test_monotone_remap_is_bit_identical(self):
        rng = np.random.default_rng(5)
        x, y = rng.random(300), rng.random(300)
        y = np.sin(4 * x) + 0.5 * y
        base = mic_e(SampleData(x, y))
        assert mic_e(SampleData(np.exp(3 * x) - 7, y)) == base
        assert mic_e(SampleData(x, 5 * y**3 + 2)) == base
        assert mic_approx(SampleData(np.log1p(x), y)) == mic_approx(SampleData(x, y))

    def test_transpose_symmetry(self):
        rng = np.random.default_rng(6)
        for n in (20, 150, 400):
            x = rng.random(n)
            sample = SampleData(x, (x - 0.5) ** 2 + 0.05 * rng.standard_normal(n))
            assert mic_e(sample) == mic_e(sample.transpose())

    def test_consistency_trend(self):
        density = two_block_density()
        dep, ind = [], []
        for n in (100, 1000):
            dep.append(np.median([mic_e(density.sample(n, np.random.default_rng(s))) for s in range(5)]))
            rngs = [np.random.default_rng(100 + s) for s in range(5)]
            ind.append(np.median([mic_e(SampleData(r.random(n), r.random(n))) for r in rngs]))
        assert dep[1] >= dep[0] and dep[1] > 0.9
        assert ind[1] < ind[0]
