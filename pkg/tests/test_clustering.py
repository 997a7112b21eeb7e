"""Tests for the method-clustering module.

Oracles: scipy.cluster.hierarchy average linkage (heights and maxclust
partitions) on tie-free random profiles, hand-evaluated merge sequences for
the tie-breaking and averaging examples, and a brute-force distance loop.
"""

import math

import numpy as np
import pytest
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist

from raterbench.clustering import (
    BENCHMARK_LABEL,
    Dendrogram,
    MethodProfile,
    agglomerate,
    cut,
    distance_matrix,
    newick,
    profiles_from_results,
)
from raterbench.estimators import MethodId


def make_profiles(rows, labels=None):
    labels = labels or [f"m{i}" for i in range(len(rows))]
    return [MethodProfile(lab, np.asarray(v, dtype=float)) for lab, v in zip(labels, rows)]


class TestDistanceMatrix:
    def test_identical_profiles(self):
        d = distance_matrix(make_profiles([(1.0, 2.0), (1.0, 2.0)]))
        assert d[0, 1] == 0.0

    def test_pythagorean(self):
        d = distance_matrix(make_profiles([(0.0, 0.0), (3.0, 4.0)]))
        assert d[0, 1] == pytest.approx(5.0, abs=1e-15)

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(7)
        values = rng.normal(size=(7, 5))
        d = distance_matrix(make_profiles(values))
        for i in range(7):
            for j in range(7):
                expected = math.sqrt(sum((values[i, s] - values[j, s]) ** 2 for s in range(5)))
                assert d[i, j] == pytest.approx(expected, abs=1e-12)

    def test_metric_properties(self):
        rng = np.random.default_rng(8)
        d = distance_matrix(make_profiles(rng.normal(size=(6, 4))))
        assert np.array_equal(d, d.T)
        assert np.all(np.diag(d) == 0.0)
        for i in range(6):
            for j in range(6):
                for k in range(6):
                    assert d[i, j] <= d[i, k] + d[k, j] + 1e-12

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            distance_matrix(make_profiles([(1.0, 2.0)]))
        with pytest.raises(ValueError):
            distance_matrix(
                [MethodProfile("a", np.zeros(3)), MethodProfile("b", np.zeros(4))]
            )


class TestAgglomerate:
    def test_duplicate_pair_merges_first(self):
        profiles = make_profiles([(0.0, 0.0), (0.0, 0.0), (3.0, 4.0)], "ABC")
        dend = agglomerate(distance_matrix(profiles), "ABC")
        assert dend.merges == ((0, 1, 0.0, 3), (2, 3, 5.0, 4))

    def test_average_linkage_on_a_line(self):
        # points 0, 1, 10, 11: the tied unit pairs merge lowest-first, then
        # the final height is the mean of the four cross distances
        profiles = make_profiles([(0.0,), (1.0,), (10.0,), (11.0,)], "ABCD")
        dend = agglomerate(distance_matrix(profiles), "ABCD")
        assert dend.merges[0] == (0, 1, 1.0, 4)
        assert dend.merges[1] == (2, 3, 1.0, 5)
        left, right, height, merged = dend.merges[2]
        assert (left, right, merged) == (4, 5, 6)
        assert height == pytest.approx(10.0, abs=1e-12)

    def test_two_leaves(self):
        profiles = make_profiles([(0.0,), (3.0,)], "AB")
        dend = agglomerate(distance_matrix(profiles), "AB")
        assert dend.merges == ((0, 1, 3.0, 2),)

    def test_heights_nondecreasing_on_random_inputs(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            values = rng.normal(size=(6, 4))
            dend = agglomerate(distance_matrix(make_profiles(values)))
            heights = [m[2] for m in dend.merges]
            assert heights == sorted(heights)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            agglomerate(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            agglomerate(np.zeros((1, 1)))
        with pytest.raises(ValueError):
            agglomerate(np.zeros((3, 3)), labels=("a", "b"))


@pytest.fixture(scope="module")
def random_case():
    rng = np.random.default_rng(42)
    values = rng.normal(size=(9, 6))
    labels = [f"m{i}" for i in range(9)]
    dend = agglomerate(distance_matrix(make_profiles(values, labels)), labels)
    z = linkage(pdist(values), method="average")
    return values, labels, dend, z


@pytest.fixture(scope="module")
def line_dendrogram():
    profiles = make_profiles([(0.0,), (1.0,), (10.0,), (11.0,)], "ABCD")
    return agglomerate(distance_matrix(profiles), "ABCD")


class TestScipyOracle:
    def test_merge_heights_match(self, random_case):
        _, _, dend, z = random_case
        mine = [m[2] for m in dend.merges]
        assert np.allclose(mine, z[:, 2], atol=1e-10)

    @pytest.mark.parametrize("k", range(1, 10))
    def test_partitions_match_maxclust(self, random_case, k):
        _, labels, dend, z = random_case
        mine = {frozenset(c) for c in cut(dend, k)}
        assignments = fcluster(z, t=k, criterion="maxclust")
        theirs = {
            frozenset(labels[i] for i in np.flatnonzero(assignments == cl))
            for cl in set(assignments)
        }
        assert mine == theirs

    def test_permutation_invariance(self, random_case):
        values, labels, dend, _ = random_case
        order = np.random.default_rng(1).permutation(len(labels))
        shuffled = make_profiles(values[order], [labels[i] for i in order])
        dend2 = agglomerate(distance_matrix(shuffled), [p.label for p in shuffled])
        for k in range(1, len(labels) + 1):
            assert {frozenset(c) for c in cut(dend, k)} == {
                frozenset(c) for c in cut(dend2, k)
            }


class TestCut:
    def test_k_one_collects_everything(self, line_dendrogram):
        assert cut(line_dendrogram, 1) == [["A", "B", "C", "D"]]

    def test_k_n_gives_singletons(self, line_dendrogram):
        assert cut(line_dendrogram, 4) == [["A"], ["B"], ["C"], ["D"]]

    def test_k_two_splits_the_line(self, line_dendrogram):
        assert cut(line_dendrogram, 2) == [["A", "B"], ["C", "D"]]

    def test_invalid_k(self, line_dendrogram):
        with pytest.raises(ValueError):
            cut(line_dendrogram, 0)
        with pytest.raises(ValueError):
            cut(line_dendrogram, 5)


class TestNewick:
    def test_three_point_tree(self):
        profiles = make_profiles([(0.0, 0.0), (0.0, 0.0), (3.0, 4.0)], "ABC")
        dend = agglomerate(distance_matrix(profiles), "ABC")
        assert newick(dend) == "(C:2.5,(A:0.0,B:0.0):2.5);"

    def test_two_leaves(self):
        profiles = make_profiles([(0.0,), (3.0,)], "AB")
        dend = agglomerate(distance_matrix(profiles), "AB")
        assert newick(dend) == "(A:1.5,B:1.5);"

    def test_contains_all_labels_once(self):
        rng = np.random.default_rng(5)
        labels = [f"m{i}" for i in range(6)]
        dend = agglomerate(
            distance_matrix(make_profiles(rng.normal(size=(6, 3)), labels)), labels
        )
        text = newick(dend)
        assert text.endswith(";")
        assert text.count("(") == text.count(")")
        for label in labels:
            assert text.count(label) == 1

    def test_empty_dendrogram_rejected(self):
        with pytest.raises(ValueError):
            newick(Dendrogram(("A",), ()))


def make_row(k, overrides=None, bias=0.01):
    row = {
        "theta": 0.5, "p1": 0.5, "p2": 0.5, "m1": 0.3, "m2": 0.3,
        "rho_u": 0.5, "rho_c": 0.5, "n": 50, "true_k": k,
    }
    for method in MethodId:
        row[f"{method.label}_bias"] = bias
        row[f"{method.label}_coverage"] = 0.95
        row[f"{method.label}_undefined"] = 0
    for key, value in (overrides or {}).items():
        row[key] = value
    return row


class TestProfilesFromResults:
    def test_recovers_means_and_benchmark(self):
        rows = [make_row(0.2), make_row(0.5, {"kappa_bias": -0.04})]
        profiles, dropped = profiles_from_results(rows)
        assert dropped == 0
        assert [p.label for p in profiles] == [m.label for m in MethodId] + [
            BENCHMARK_LABEL
        ]
        by_label = {p.label: p.values for p in profiles}
        assert np.allclose(by_label["K"], [0.2, 0.5])
        assert np.allclose(by_label["pa"], [0.21, 0.51])
        assert np.allclose(by_label["kappa"], [0.21, 0.46])

    def test_undefined_settings_dropped_everywhere(self):
        rows = [
            make_row(0.2),
            make_row(0.5, {"Y_bias": float("nan")}),
            make_row(0.7, {"true_k": float("nan")}),
        ]
        profiles, dropped = profiles_from_results(rows)
        assert dropped == 2
        assert all(len(p.values) == 1 for p in profiles)

    def test_all_dropped_raises(self):
        rows = [make_row(0.4, {"pa_bias": float("nan")})]
        with pytest.raises(ValueError):
            profiles_from_results(rows)
