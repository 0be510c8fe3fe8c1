import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropic.entropy import (
    BOLTZMANN,
    DiscreteDistribution,
    Histogram,
    LogBase,
    distribution_from_histogram,
    info_content,
    normalized_entropy,
    renyi_entropy,
    renyi_entropy_pnorm,
    shannon_entropy,
    thermodynamic_entropy,
)

U2 = DiscreteDistribution([0.5, 0.5])
U4 = DiscreteDistribution.uniform(4)
DEGENERATE = DiscreteDistribution([1.0])
SKEWED = DiscreteDistribution([0.5, 0.25, 0.25])


@st.composite
def distributions(draw, min_size=1, max_size=16):
    n = draw(st.integers(min_size, max_size))
    w = draw(
        st.lists(st.floats(0, 1, allow_nan=False), min_size=n, max_size=n).filter(
            lambda xs: sum(xs) > 1e-6
        )
    )
    w = np.asarray(w)
    return DiscreteDistribution(w / w.sum())


class TestDistribution:
    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            DiscreteDistribution([0.5, 0.4])

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            DiscreteDistribution([1.5, -0.5])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            DiscreteDistribution([])

    def test_read_only(self):
        with pytest.raises(ValueError):
            U2.probs[0] = 1.0

    def test_histogram_shape_checks(self):
        with pytest.raises(ValueError):
            Histogram([0.0, 1.0, 1.0], [1, 1])
        with pytest.raises(ValueError):
            Histogram([0.0, 1.0, 2.0], [1])

    def test_log_base_parse(self):
        assert LogBase.parse("e") is LogBase.E
        assert LogBase.parse(2) is LogBase.TWO
        assert LogBase.parse("10") is LogBase.TEN
        with pytest.raises(ValueError):
            LogBase.parse("3")


class TestInfoContent:
    @pytest.mark.parametrize("p,expected", [(1.0, 0.0), (0.5, 1.0), (0.25, 2.0)])
    def test_values(self, p, expected):
        assert info_content(p, LogBase.TWO) == expected

    @pytest.mark.parametrize("p", [0.0, -0.1, 1.0000001])
    def test_domain(self, p):
        with pytest.raises(ValueError):
            info_content(p)


class TestShannon:
    def test_examples(self):
        assert shannon_entropy(U2) == 1.0
        assert shannon_entropy(DEGENERATE) == 0.0
        # -(0.5 log2 0.5 + 2 * 0.25 log2 0.25) = 0.5 + 1.0
        assert shannon_entropy(SKEWED) == pytest.approx(1.5, abs=1e-15)

    def test_zero_entries_ignored(self):
        assert shannon_entropy([0.5, 0.0, 0.5]) == 1.0

    def test_bases(self):
        assert shannon_entropy(U2, LogBase.E) == pytest.approx(math.log(2), abs=1e-15)
        assert shannon_entropy(U4, LogBase.TEN) == pytest.approx(math.log10(4), abs=1e-15)

    @given(distributions())
    def test_bounded_by_log_n(self, d):
        h = shannon_entropy(d)
        assert 0.0 <= h <= math.log2(len(d)) + 1e-9

    @given(st.integers(1, 64))
    def test_uniform_attains_log_n(self, n):
        assert shannon_entropy(DiscreteDistribution.uniform(n)) == pytest.approx(
            math.log2(n), abs=1e-9
        )

    @given(distributions(min_size=2))
    def test_log_n_only_when_uniform(self, d):
        n = len(d)
        if np.max(np.abs(d.probs - 1.0 / n)) > 1e-3:
            assert shannon_entropy(d) < math.log2(n) - 1e-9


class TestRenyi:
    def test_examples(self):
        assert renyi_entropy(U4, 2) == pytest.approx(2.0, abs=1e-15)
        assert renyi_entropy(DEGENERATE, 2) == 0.0
        # -log2(0.25 + 0.0625 + 0.0625), mpmath reference
        assert renyi_entropy(SKEWED, 2) == pytest.approx(1.41503749927884381854, abs=1e-14)

    def test_half_order_reference(self):
        # 2 log2(sqrt(0.5) + 2 sqrt(0.25)), mpmath reference
        assert renyi_entropy(SKEWED, 0.5) == pytest.approx(1.54310660632722394529, abs=1e-14)

    def test_order_zero_is_hartley(self):
        assert renyi_entropy([0.5, 0.0, 0.5], 0) == 1.0

    @pytest.mark.parametrize("alpha", [1.0, -0.5, float("nan")])
    def test_domain(self, alpha):
        with pytest.raises(ValueError):
            renyi_entropy(U2, alpha)
        with pytest.raises(ValueError):
            renyi_entropy_pnorm(U2, alpha)

    def test_pnorm_rejects_zero_order(self):
        with pytest.raises(ValueError):
            renyi_entropy_pnorm(U2, 0.0)

    @given(st.integers(1, 32), st.sampled_from([0.0, 0.25, 0.5, 2.0, 3.0, 10.0]))
    def test_uniform_is_log_n_at_every_order(self, n, alpha):
        assert renyi_entropy(DiscreteDistribution.uniform(n), alpha) == pytest.approx(
            math.log2(n), abs=1e-9
        )

    def test_pnorm_examples(self):
        assert renyi_entropy_pnorm(U4, 2) == pytest.approx(2.0, abs=1e-15)
        assert renyi_entropy_pnorm(DEGENERATE, 0.5) == 0.0
        assert renyi_entropy_pnorm(SKEWED, 0.5) == pytest.approx(
            renyi_entropy(SKEWED, 0.5), abs=1e-10
        )

    @given(distributions(), st.sampled_from([0.25, 0.5, 2.0, 3.0, 10.0]))
    def test_pnorm_identity(self, d, alpha):
        assert abs(renyi_entropy(d, alpha) - renyi_entropy_pnorm(d, alpha)) <= 1e-10

    @settings(max_examples=200)
    @given(distributions(), st.sampled_from([1 - 1e-3, 1 + 1e-3]))
    def test_shannon_limit(self, d, alpha):
        assert abs(renyi_entropy(d, alpha) - shannon_entropy(d)) <= 5e-3

    @given(
        distributions(),
        st.floats(0, 12).filter(lambda a: abs(a - 1) > 1e-6),
        st.floats(0, 12).filter(lambda a: abs(a - 1) > 1e-6),
    )
    def test_non_increasing_in_order(self, d, a1, a2):
        lo, hi = sorted((a1, a2))
        assert renyi_entropy(d, lo) >= renyi_entropy(d, hi) - 1e-12


class TestThermodynamic:
    def test_examples(self):
        assert thermodynamic_entropy(DEGENERATE) == 0.0
        assert thermodynamic_entropy(U2) == pytest.approx(9.569929616929079315e-24, rel=1e-15)
        assert thermodynamic_entropy(U4) == pytest.approx(1.913985923385815863e-23, rel=1e-15)

    @given(distributions())
    def test_matches_scaled_nats(self, d):
        expected = BOLTZMANN * shannon_entropy(d, LogBase.E)
        assert abs(thermodynamic_entropy(d) - expected) <= 1e-30


class TestNormalizedEntropy:
    def test_examples(self):
        assert normalized_entropy([U2, U2]) == 1.0
        assert normalized_entropy([DEGENERATE] * 3) == 0.0
        assert normalized_entropy([U2, DEGENERATE]) == 0.5

    def test_empty(self):
        with pytest.raises(ValueError):
            normalized_entropy([])


class TestFromHistogram:
    @pytest.mark.parametrize(
        "counts,expected",
        [([2, 2], [0.5, 0.5]), ([4, 0, 0, 0], [1, 0, 0, 0]), ([1, 2, 1], [0.25, 0.5, 0.25])],
    )
    def test_examples(self, counts, expected):
        h = Histogram(np.arange(len(counts) + 1, dtype=float), counts)
        np.testing.assert_array_equal(distribution_from_histogram(h).probs, expected)

    def test_empty_histogram(self):
        with pytest.raises(ValueError):
            distribution_from_histogram(Histogram.equal_width(0, 1, 3))

    @given(st.lists(st.integers(0, 10**6), min_size=1, max_size=50).filter(any))
    def test_sums_to_one(self, counts):
        assert abs(distribution_from_histogram(counts).probs.sum() - 1.0) <= 1e-12
