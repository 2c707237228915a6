import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mickit.info import (
    DiscreteJoint,
    PerturbationSpec,
    binary_entropy,
    entropy,
    linfoot,
    mutual_information,
    normalized_mi,
    perturb,
    random_mass_move,
)

# frozen from tests/oracles/oracle_info_values.py (mpmath, 50 digits)
HB_QUARTER = 0.56233514461880835
ENTROPY_532 = 1.0296530140645735
MI_4114 = 0.19274475702175743
NMI_3X2 = 0.1314595241545343
Q_HALF_BIT = 0.055013932219179775631


def _double_sum_mi(mass):
    mass = np.asarray(mass, dtype=float)
    rows, cols = mass.sum(axis=1), mass.sum(axis=0)
    total = 0.0
    for i in range(mass.shape[0]):
        for j in range(mass.shape[1]):
            p = mass[i, j]
            if p > 0:
                total += p * math.log(p / (rows[i] * cols[j]))
    return total


joints = st.integers(1, 5).flatmap(
    lambda k: st.integers(1, 5).flatmap(
        lambda l: st.lists(st.floats(0, 1), min_size=k * l, max_size=k * l).map(
            lambda v, k=k, l=l: np.array(v).reshape(k, l)
        )
    )
).filter(lambda m: m.sum() > 1e-6).map(lambda m: DiscreteJoint(m / m.sum()))


class TestBinaryEntropy:
    def test_endpoints_and_symmetry_maximum(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.5) == pytest.approx(math.log(2), abs=1e-15)

    def test_quarter_matches_high_precision_value(self):
        assert binary_entropy(0.25) == pytest.approx(HB_QUARTER, abs=1e-15)

    @pytest.mark.parametrize("p", [-0.1, 1.2, float("nan")])
    def test_rejects_outside_unit_interval(self, p):
        with pytest.raises(ValueError):
            binary_entropy(p)

    def test_vectorized(self):
        out = binary_entropy(np.array([0.0, 0.25, 0.5]))
        assert out == pytest.approx([0.0, HB_QUARTER, math.log(2)])


class TestEntropy:
    def test_degenerate_is_zero(self):
        assert entropy([1, 0, 0]) == 0.0

    def test_uniform(self):
        assert entropy([0.25] * 4) == pytest.approx(math.log(4), abs=1e-15)

    def test_three_point_value(self):
        assert entropy([0.5, 0.3, 0.2]) == pytest.approx(ENTROPY_532, abs=1e-15)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            entropy([0.5, 0.6])


class TestDiscreteJoint:
    def test_marginals(self):
        j = DiscreteJoint([[0.1, 0.2], [0.3, 0.4]])
        assert j.row_marginals == pytest.approx([0.3, 0.7])
        assert j.col_marginals == pytest.approx([0.4, 0.6])

    @pytest.mark.parametrize(
        "mass", [[[0.5, 0.6]], [[-0.1, 1.1]], [[np.nan, 1.0]], [], [[0.5, 0.5 + 1e-10]]]
    )
    def test_rejects_invalid(self, mass):
        with pytest.raises(ValueError):
            DiscreteJoint(mass)

    def test_immutable(self):
        j = DiscreteJoint([[1.0]])
        with pytest.raises(ValueError):
            j.mass[0, 0] = 0.5

    def test_empty_rows_allowed(self):
        j = DiscreteJoint([[0.5, 0.5], [0.0, 0.0]])
        assert j.shape == (2, 2)


class TestMutualInformation:
    def test_independence_is_zero(self):
        assert mutual_information(DiscreteJoint(np.full((2, 2), 0.25))) == 0.0

    def test_diagonal_is_log2(self):
        assert mutual_information(DiscreteJoint([[0.5, 0], [0, 0.5]])) == pytest.approx(math.log(2), abs=1e-15)

    def test_four_one_fixture(self):
        assert mutual_information(DiscreteJoint([[0.4, 0.1], [0.1, 0.4]])) == pytest.approx(MI_4114, abs=1e-15)

    def test_product_distributions_give_zero(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            r, c = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(3))
            assert mutual_information(DiscreteJoint(np.outer(r, c))) == pytest.approx(0.0, abs=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(joints)
    def test_matches_double_sum_and_bounds(self, j):
        value = mutual_information(j)
        assert value == pytest.approx(_double_sum_mi(j.mass), abs=1e-12)
        assert 0 <= value <= min(entropy(j.row_marginals), entropy(j.col_marginals)) + 1e-12


class TestNormalizedAndLinfoot:
    def test_diagonal_normalizes_to_one(self):
        assert normalized_mi(DiscreteJoint([[0.5, 0], [0, 0.5]])) == 1.0

    def test_independence_zero(self):
        assert normalized_mi(DiscreteJoint(np.full((3, 3), 1 / 9))) == pytest.approx(0.0, abs=1e-15)

    def test_three_by_two_fixture(self):
        j = DiscreteJoint(np.array([[3, 1], [2, 6], [5, 3]]) / 20)
        assert normalized_mi(j) == pytest.approx(NMI_3X2, abs=1e-14)

    def test_needs_two_rows_and_columns(self):
        with pytest.raises(ValueError):
            normalized_mi(DiscreteJoint([[0.5, 0.5]]))

    @settings(max_examples=100, deadline=None)
    @given(joints)
    def test_normalized_in_unit_interval(self, j):
        if min(j.shape) >= 2:
            assert 0 <= normalized_mi(j) <= 1

    def test_linfoot_values(self):
        assert linfoot(DiscreteJoint(np.full((2, 2), 0.25))) == 0.0
        assert linfoot(DiscreteJoint([[0.5, 0], [0, 0.5]])) == pytest.approx(0.75, abs=1e-15)
        q = Q_HALF_BIT
        half_bit = DiscreteJoint([[q, 0.5 - q], [0.5 - q, q]])
        assert mutual_information(half_bit) / math.log(2) == pytest.approx(0.5, abs=1e-12)
        assert linfoot(half_bit) == pytest.approx(0.5, abs=1e-12)


class TestPerturb:
    def test_zero_spec_is_identity(self):
        j = DiscreteJoint([[0.1, 0.2], [0.3, 0.4]])
        assert perturb(j, PerturbationSpec(np.zeros((2, 2)))) == j

    def test_single_move(self):
        j = DiscreteJoint(np.full((2, 2), 0.25))
        spec = PerturbationSpec.move((2, 2), (0, 0), (0, 1), 0.1)
        assert perturb(j, spec).mass == pytest.approx(np.array([[0.15, 0.35], [0.25, 0.25]]))
        assert spec.total_moved == pytest.approx(0.1)

    def test_negative_cell_rejected(self):
        j = DiscreteJoint(np.full((2, 2), 0.25))
        with pytest.raises(ValueError):
            perturb(j, PerturbationSpec.move((2, 2), (0, 0), (0, 1), 0.3))

    def test_moved_mass_equals_positive_part(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            mass = rng.dirichlet(np.ones(12)).reshape(3, 4)
            d = random_mass_move(mass, rng.uniform(0, 0.5), rng)
            spec = PerturbationSpec(d)
            assert spec.total_moved == pytest.approx(d[d > 0].sum(), abs=1e-12)
            assert np.all(mass + d >= -1e-15)
