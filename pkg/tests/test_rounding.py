import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mafapprox.errors import InternalInconsistencyError
from mafapprox.instances import quarter_pendant_solution, random_tree
from mafapprox.lp import build_model, solve_lp
from mafapprox.rounding import (
    QUARTER,
    descendant_component,
    round_quarter,
    rounding_certificate,
    rounding_trace,
)
from mafapprox.phylo import rooted_view
from mafapprox.solution import EdgeCut
from oracles import literal_rounding

from conftest import random_instances


def random_values(tree, rng, scale=40):
    return [Fraction(rng.randint(0, 14), scale) for _ in range(tree.num_edges)]


def test_zero_solution():
    t = random_tree([f"x{i}" for i in range(7)], random.Random(0))
    zero = [0] * t.num_edges
    cut = round_quarter(t, zero)
    assert cut == EdgeCut()
    cert = rounding_certificate(t, zero, cut)
    assert cert.ok and cert.cut_size == 0 and cert.per_edge_w == {}


def test_grid_two_quarter_solution(grids):
    t1 = grids[2][0]
    x = quarter_pendant_solution(t1)
    trace = rounding_trace(t1, x)
    pendant = {t1.pendant_edge(label) for label in t1.labels}
    assert set(trace.cut.edges) == pendant
    assert trace.root == "(1,1)"
    # each pendant edge reaches exactly 1/4 on its own; the root's pendant edge comes last
    assert set(trace.insertion_weight.values()) == {QUARTER}
    assert trace.order[-1] == t1.pendant_edge("(1,1)")
    cert = rounding_certificate(t1, x, trace.cut, model=build_model(grids[2]))
    assert cert.cut_size == 4 == 4 * cert.lp_objective
    assert cert.ok and cert.feasible


def test_input_validation():
    t = random_tree("abcde", random.Random(1))
    with pytest.raises(ValueError):
        round_quarter(t, [0] * (t.num_edges - 1))
    with pytest.raises(ValueError):
        round_quarter(t, [-1] + [0] * (t.num_edges - 1))


@pytest.mark.parametrize("seed", range(40))
def test_matches_literal_loop(seed):
    rng = random.Random(seed)
    t = random_tree([f"x{i}" for i in range(rng.randint(3, 14))], rng)
    x = random_values(t, rng)
    root = rng.choice(t.labels)
    cut = set(round_quarter(t, x, root).edges)
    assert cut == literal_rounding(t, x, root, pick=max) == literal_rounding(t, x, root, pick=min)


def test_sibling_order_does_not_matter():
    rng = random.Random(7)
    for _ in range(100):
        t = random_tree([f"x{i}" for i in range(rng.randint(3, 16))], rng)
        x = random_values(t, rng)
        assert rounding_trace(t, x).cut == rounding_trace(t, x, reverse_children=True).cut


def test_insertion_weights_match_final_components():
    rng = random.Random(8)
    for _ in range(50):
        t = random_tree([f"x{i}" for i in range(rng.randint(3, 16))], rng)
        x = random_values(t, rng)
        trace = rounding_trace(t, x)
        cert = rounding_certificate(t, x, trace.cut)
        assert cert.per_edge_w == trace.insertion_weight
        view = rooted_view(t)
        for e in trace.cut:
            below = [f for f in descendant_component(view, trace.cut, e) if f != e]
            assert all(sum(x[g] for g in descendant_component(view, trace.cut, f)) < QUARTER for f in below)


def test_certificate_on_lp_optima():
    for trees in random_instances(60, 4, 12, seed=31):
        model = build_model(trees)
        x = solve_lp(model)
        for root in (None, trees[0].labels[-1]):
            cut = round_quarter(trees[0], x, root)
            cert = rounding_certificate(trees[0], x, cut, root=root, model=model)
            assert cert.ok and cert.feasible
            assert cert.cut_size <= 4 * x.objective
            assert cert.disjoint_ok and cert.path_mass_ok and cert.uncut_below_quarter


def test_root_invariance_of_guarantee():
    trees = random_instances(1, 11, 11, ts=(3,), seed=32)[0]
    model = build_model(trees)
    x = solve_lp(model)
    for root in trees[0].labels:
        cut = round_quarter(trees[0], x, root)
        assert rounding_certificate(trees[0], x, cut, root=root, model=model).ok


def test_certificate_rejects_tampered_cut(grids):
    t1 = grids[2][0]
    x = quarter_pendant_solution(t1)
    cut = round_quarter(t1, x)
    short = EdgeCut(cut.edges[1:])
    with pytest.raises(InternalInconsistencyError):
        rounding_certificate(t1, x, short)
    cert = rounding_certificate(t1, x, short, model=build_model(grids[2]), strict=False)
    # still covers the single row, but an uncut edge now carries 1/4
    assert not cert.ok and not cert.uncut_below_quarter and cert.feasible


def test_certificate_json_is_stable(grids):
    t1 = grids[2][0]
    x = quarter_pendant_solution(t1)
    cert = rounding_certificate(t1, x, round_quarter(t1, x))
    assert cert.to_json() == rounding_certificate(t1, x, round_quarter(t1, x)).to_json()
    assert cert.to_dict()["per_edge_w"] == {"0": "1/4", "1": "1/4", "3": "1/4", "4": "1/4"}


@given(st.integers(3, 12), st.integers(0, 10**6), st.fractions(1, 4))
@settings(max_examples=150, deadline=None)
def test_scaling_up_never_shrinks_cut(n, seed, c):
    rng = random.Random(seed)
    t = random_tree([f"x{i}" for i in range(n)], rng)
    x = random_values(t, rng)
    assert len(round_quarter(t, [c * v for v in x])) >= len(round_quarter(t, x))


@given(st.integers(3, 12), st.integers(0, 10**6))
@settings(max_examples=150, deadline=None)
def test_ratio_and_path_mass_on_arbitrary_values(n, seed):
    rng = random.Random(seed)
    t = random_tree([f"x{i}" for i in range(n)], rng)
    x = random_values(t, rng)
    cert = rounding_certificate(t, x, round_quarter(t, x))
    assert cert.ok and cert.max_uncut_w < QUARTER
