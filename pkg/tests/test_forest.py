import random
from itertools import combinations

import pytest

from mafapprox.errors import PartitionError, SizeGuardError
from mafapprox.forest import (
    AgreementForest,
    brute_force_maf,
    minimal_cut,
    partition_from_cut,
    tbr_estimate,
    verify_af,
    verify_cut_feasibility_equivalence,
)
from mafapprox.instances import grid_label
from mafapprox.lp import build_model
from mafapprox.phylo import is_isomorphic, parse_newick, restrict, steiner_edges
from mafapprox.solution import EdgeCut

from conftest import random_instances

QUARTET = parse_newick("((a,b),(c,d));")[0]


def singletons(tree):
    return AgreementForest.of([[x] for x in tree.labels])


def definition_check(trees, forest):
    """Agreement-forest conditions straight from the definition, all tree pairs."""
    for block in forest.components:
        for s, t in combinations(trees, 2):
            if not is_isomorphic(restrict(s, block), restrict(t, block)):
                return False
    for tree in trees:
        for a, b in combinations(forest.components, 2):
            if len(a) > 1 and len(b) > 1 and steiner_edges(tree, a) & steiner_edges(tree, b):
                return False
    return True


class TestPartition:
    def test_empty_cut(self):
        assert partition_from_cut(QUARTET, EdgeCut()).components == (("a", "b", "c", "d"),)

    def test_middle_edge(self):
        middle = (set(range(5)) - {QUARTET.pendant_edge(x) for x in "abcd"}).pop()
        assert partition_from_cut(QUARTET, EdgeCut.of([middle])).components == (("a", "b"), ("c", "d"))

    def test_all_pendant_edges(self):
        cut = EdgeCut.of(QUARTET.pendant_edge(x) for x in "abcd")
        assert partition_from_cut(QUARTET, cut) == singletons(QUARTET)

    def test_canonical_order(self):
        f = AgreementForest.of([["d", "c"], ["b"], ["a"]])
        assert f.components == (("a",), ("b",), ("c", "d")) and f.k == 3
        assert AgreementForest.from_dict({"forest": f.to_dict()}) == f


class TestVerify:
    def test_singletons_accepted(self):
        for trees in random_instances(10, 4, 12, seed=41):
            assert verify_af(trees, singletons(trees[0])).accepted

    def test_grid_two(self, grids):
        f = AgreementForest.of([["(1,1)"], ["(1,2)", "(2,1)", "(2,2)"]])
        assert verify_af(grids[2], f)
        whole = verify_af(grids[2], AgreementForest.of([grids[2][0].labels]))
        assert not whole and whole.witness["type"] == "non_isomorphic" and whole.witness["trees"] == [0, 1]

    def test_grid_four_rows(self, grids):
        rows = AgreementForest.of([[grid_label(i, j) for j in range(1, 5)] for i in range(1, 5)])
        verdict = verify_af(grids[4], rows)
        assert not verdict
        assert verdict.witness["type"] == "overlap" and verdict.witness["tree"] == 1
        assert verdict.to_dict()["verdict"] == "REJECT"

    def test_partition_errors(self):
        with pytest.raises(PartitionError):
            verify_af([QUARTET], AgreementForest.of([["a", "b"], ["b", "c", "d"]]))
        with pytest.raises(PartitionError):
            verify_af([QUARTET], AgreementForest.of([["a", "b"], ["c"]]))
        with pytest.raises(PartitionError):
            AgreementForest.from_dict({"blocks": []})

    def test_matches_definition_on_random_partitions(self):
        rng = random.Random(42)
        for trees in random_instances(120, 4, 9, seed=43):
            cut = EdgeCut.of(e for e in range(trees[0].num_edges) if rng.random() < 0.3)
            forest = partition_from_cut(trees[0], cut)
            assert verify_af(trees, forest).accepted == definition_check(trees, forest)
            # arbitrary partitions too, not only those coming from cuts
            labels = list(trees[0].labels)
            rng.shuffle(labels)
            blocks = {}
            for x in labels:
                blocks.setdefault(rng.randrange(3), []).append(x)
            forest = AgreementForest.of(blocks.values())
            assert verify_af(trees, forest).accepted == definition_check(trees, forest)

    def test_singleton_refinement_of_accepted(self):
        for trees in random_instances(30, 4, 8, seed=44):
            forest, _ = brute_force_maf(trees)
            assert verify_af(trees, forest)
            assert verify_af(trees, singletons(trees[0]))


class TestEquivalence:
    def test_empty_cut_identical(self):
        report = verify_cut_feasibility_equivalence([QUARTET, QUARTET], EdgeCut())
        assert report.ilp_feasible and report.verdict.accepted

    def test_empty_cut_grid(self, grids):
        report = verify_cut_feasibility_equivalence(grids[2], EdgeCut())
        assert not report.ilp_feasible and not report.verdict.accepted

    def test_random_cuts(self):
        rng = random.Random(45)
        for trees in random_instances(100, 4, 10, seed=46):
            model = build_model(trees)
            cut = EdgeCut.of(e for e in range(model.num_vars) if rng.random() < rng.random())
            assert verify_cut_feasibility_equivalence(trees, cut, model).agree


class TestBruteForce:
    def test_identical(self):
        forest, cut = brute_force_maf([QUARTET, QUARTET])
        assert forest.k == 1 and len(cut) == 0

    def test_grid_two(self, grids):
        forest, cut = brute_force_maf(grids[2])
        assert forest.k == 2 and len(cut) == 1

    def test_grid_three(self, grids):
        forest, cut = brute_force_maf(grids[3])
        assert forest.k == 5 >= 9 - 6 + 2

    def test_guard(self):
        trees = random_instances(1, 12, 12, ts=(2,), seed=47)[0]
        with pytest.raises(SizeGuardError):
            brute_force_maf(trees)

    def test_no_smaller_cut_works(self):
        for trees in random_instances(20, 4, 7, seed=48):
            forest, cut = brute_force_maf(trees)
            model = build_model(trees)
            if not cut:
                continue
            for smaller in combinations(range(model.num_vars), len(cut) - 1):
                assert not model.is_feasible_cut(EdgeCut(smaller))


class TestMinimalCut:
    def test_galois(self):
        for trees in random_instances(40, 4, 8, seed=49):
            forest, _ = brute_force_maf(trees)
            recut = minimal_cut(trees[0], forest)
            assert len(recut) == forest.k - 1
            assert partition_from_cut(trees[0], recut) == forest

    def test_random_cut_partitions(self):
        rng = random.Random(50)
        for trees in random_instances(60, 4, 14, ts=(2,), seed=51):
            cut = EdgeCut.of(e for e in range(trees[0].num_edges) if rng.random() < 0.4)
            forest = partition_from_cut(trees[0], cut)
            recut = minimal_cut(trees[0], forest)
            assert len(recut) == forest.k - 1 <= len(cut)
            assert partition_from_cut(trees[0], recut) == forest

    def test_overlapping_blocks_rejected(self):
        with pytest.raises(PartitionError):
            minimal_cut(QUARTET, AgreementForest.of([["a", "c"], ["b", "d"]]))


def test_tbr_estimate():
    assert tbr_estimate(2, 2).value == 1
    assert tbr_estimate(1, 2).value == 0
    assert tbr_estimate(5, 3) is None
    assert "upper bound" in tbr_estimate(4, 2, exact=False).label
    with pytest.raises(ValueError):
        tbr_estimate(0, 2)
