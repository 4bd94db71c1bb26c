import itertools
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from noisyrcs import BipartiteGraph, MultiSubset, count_semi_matchings, lovasz_matching_test, sample_semi_matching
from noisyrcs.errors import BoundsError, DomainError, ParseError, ResourceError
from noisyrcs.matching import (
    det_mod,
    has_perfect_matching,
    maximum_matching_size,
    sample_semi_matchings,
    semi_matching_distribution,
)

K22 = BipartiteGraph.complete(2, 2)


def test_k22_law():
    law = semi_matching_distribution(K22)
    assert law == {
        MultiSubset((2, 0)): Fraction(1, 4),
        MultiSubset((1, 1)): Fraction(1, 2),
        MultiSubset((0, 2)): Fraction(1, 4),
    }


def test_counts():
    assert count_semi_matchings(K22, MultiSubset((1, 1))) == 2
    g = BipartiteGraph(2, 3, ((0, 1), (0, 1)))
    assert count_semi_matchings(g, MultiSubset((1, 0, 1))) == 0
    assert count_semi_matchings(g, MultiSubset((2, 0, 0))) == 1
    h = BipartiteGraph(2, 2, ((0, 1), (1,)))
    assert count_semi_matchings(h, MultiSubset((2, 0))) == 0
    assert count_semi_matchings(K22, MultiSubset((1, 0))) == 0


def test_count_against_brute_force(gen):
    for _ in range(20):
        g = BipartiteGraph.random(4, 3, 0.6, gen)
        for counts in itertools.product(range(5), repeat=3):
            brute = sum(
                1
                for choice in itertools.product(range(3), repeat=4)
                if all(b in g.neighbors[a] for a, b in enumerate(choice))
                and tuple(choice.count(b) for b in range(3)) == counts
            )
            assert count_semi_matchings(g, MultiSubset(counts)) == brute


def test_exact_law_is_count_over_product(gen):
    for na, nb in itertools.product(range(1, 5), repeat=2):
        g = BipartiteGraph.random(na, nb, 0.7, gen)
        if any(not x for x in g.neighbors):
            continue
        denom = np.prod([len(x) for x in g.neighbors])
        law = semi_matching_distribution(g)
        assert sum(law.values()) == 1
        for C, p in law.items():
            assert p == Fraction(count_semi_matchings(g, C), int(denom))


def test_single_neighbour_is_deterministic():
    g = BipartiteGraph(3, 3, ((2,), (0,), (2,)))
    assert sample_semi_matching(g, seed=1) == MultiSubset((1, 0, 2))
    draws = sample_semi_matchings(g, 10, seed=2)
    assert (draws == [1, 0, 2]).all()


def test_sampler_chi_squared_k33():
    g = BipartiteGraph.complete(3, 3)
    k = 10**5
    draws = sample_semi_matchings(g, k, seed=7)
    law = semi_matching_distribution(g)
    keys = sorted(law, key=lambda c: c.counts)
    observed = [int(np.all(draws == c.counts, axis=1).sum()) for c in keys]
    assert sum(observed) == k
    expected = [float(law[c]) * k for c in keys]
    assert stats.chisquare(observed, expected).pvalue > 0.01


def test_sampler_errors():
    g = BipartiteGraph(2, 2, ((0,), ()))
    with pytest.raises(DomainError):
        sample_semi_matching(g, seed=0)
    with pytest.raises(ResourceError):
        count_semi_matchings(BipartiteGraph.complete(13, 2), MultiSubset((13, 0)))


def test_det_mod():
    assert det_mod([[2, 3], [1, 4]], 7) == 5
    assert det_mod([[0, 1], [1, 0]], 11) == 10
    assert det_mod([[1, 2], [2, 4]], 101) == 0
    gen = np.random.default_rng(3)
    for _ in range(20):
        m = gen.integers(-50, 50, size=(4, 4))
        assert det_mod(m.tolist(), 10007) == int(round(np.linalg.det(m))) % 10007


def test_lovasz_examples():
    diag = BipartiteGraph(4, 4, ((0,), (1,), (2,), (3,)))
    v = lovasz_matching_test(diag, seed=1)
    assert v.perfect_matching and v.certain and v.trials == 1 and v.label == "yes"
    bad = BipartiteGraph(2, 2, ((0,), (0,)))
    v = lovasz_matching_test(bad, k=10, seed=1)
    assert not v.perfect_matching and v.label == "probably-no"
    assert v.trials == 10
    assert v.error_bound == pytest.approx((2 / (2**31 - 1)) ** 10)


def test_lovasz_parameter_errors():
    with pytest.raises(BoundsError):
        lovasz_matching_test(K22, q=3)
    with pytest.raises(BoundsError):
        lovasz_matching_test(K22, q=1001)
    with pytest.raises(DomainError):
        lovasz_matching_test(BipartiteGraph.complete(2, 3))


def test_lovasz_agrees_with_oracle(gen):
    for i in range(100):
        n = int(gen.integers(1, 9))
        g = BipartiteGraph.random(n, n, float(gen.uniform(0.1, 0.5)), gen)
        assert lovasz_matching_test(g, seed=i).perfect_matching == has_perfect_matching(g)


def test_maximum_matching_brute_force(gen):
    for _ in range(30):
        g = BipartiteGraph.random(4, 4, 0.4, gen)
        best = 0
        for perm in itertools.permutations(range(4)):
            best = max(best, sum(perm[a] in g.neighbors[a] for a in range(4)))
        assert maximum_matching_size(g) == best


def test_graph_text_round_trip(gen):
    g = BipartiteGraph.random(5, 4, 0.5, gen)
    assert BipartiteGraph.from_text(g.to_text()) == g


@pytest.mark.parametrize("text", ["", "na=2\n0\n1\n", "na=2 nb=2\n0\n", "na=1 nb=2\nx\n", "na=1 nb=2\n5\n"])
def test_graph_parse_errors(text):
    with pytest.raises(ParseError):
        BipartiteGraph.from_text(text)
