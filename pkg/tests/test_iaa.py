from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from histbank.core import Span
from histbank.iaa import (NULL, DegenerateData, TedCosts, TokenMismatch, Tree, cell_alpha,
                          cell_items, distance_alpha, edit_breakdown, nominal_alpha, ted,
                          tree_edit_distance, tree_from_forest)
from histbank.treegrid import GridCell, GridDocument, grid_to_tree

from generators import random_tree
from oracles import all_trees, pairwise_alpha, ted_by_mappings


def to_tree(t) -> Tree:
    return Tree(t[0], tuple(to_tree(c) for c in t[1]))


trees = st.builds(lambda seed, n: random_tree(random.Random(seed), n),
                  st.integers(0, 2 ** 32 - 1), st.integers(1, 9))


class TestTed:
    def test_small_trees_match_mapping_search(self):
        forest = all_trees("ab", 4)
        converted = [to_tree(t) for t in forest]
        for x, tx in zip(forest, converted):
            for y, ty in zip(forest, converted):
                assert ted(tx, ty) == ted_by_mappings(x, y), (x, y)

    def test_classic_example(self):
        t1 = Tree("f", (Tree("d", (Tree("a"), Tree("c", (Tree("b"),)))), Tree("e")))
        t2 = Tree("f", (Tree("c", (Tree("d", (Tree("a"), Tree("b"))),)), Tree("e")))
        assert ted(t1, t2) == 2.0

    @settings(max_examples=300, deadline=None)
    @given(trees, trees)
    def test_metric_axioms(self, x, y):
        assert ted(x, y) == ted(y, x)
        assert ted(x, x) == 0
        assert (ted(x, y) == 0) == (x == y)
        assert ted(x, y) <= x.size() + y.size()

    @settings(max_examples=200, deadline=None)
    @given(trees, trees, trees)
    def test_triangle(self, x, y, z):
        assert ted(x, z) <= ted(x, y) + ted(y, z) + 1e-9

    @settings(max_examples=200, deadline=None)
    @given(trees, trees)
    def test_script_cost_equals_distance(self, x, y):
        d, script = tree_edit_distance(x, y)
        assert math.isclose(script.cost, d)
        counts = script.counts()
        # nodes kept from x are the nodes of y not inserted
        kept = x.size() - counts["remove"]
        assert kept == y.size() - counts["insert"]

    def test_string_update_mode(self):
        costs = TedCosts(mode="string")
        assert ted(Tree("np"), Tree("nx"), costs) == pytest.approx(0.5)
        assert ted(Tree("np"), Tree("np"), costs) == 0
        with pytest.raises(ValueError):
            TedCosts(mode="bogus")

    def test_forest_gets_virtual_root(self):
        grid = GridDocument(("a", "b"), (GridCell(0, Span(0, 1), "s"), GridCell(0, Span(1, 2), "ni")))
        tree = tree_from_forest(grid_to_tree(grid))
        assert tree.label == "ROOT" and len(tree.children) == 2


class TestNominal:
    def test_perfect_agreement(self):
        assert nominal_alpha([("A", "A"), ("B", "B"), ("C", "C", "C")]) == 1.0

    def test_two_by_two_by_hand(self):
        # o_AA = 2, o_AB = o_BA = 1; n_A = 3, n_B = 1, n = 4
        # alpha = 1 - (n - 1) * 2 / (2 * 3 * 1) = 0
        items = [("A", "A"), ("A", "B")]
        assert abs(nominal_alpha(items) - 0.0) <= 1e-12
        assert abs(nominal_alpha(items) - pairwise_alpha(items)) <= 1e-12

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.lists(st.sampled_from(["A", "B", "C", None]), min_size=2, max_size=4),
                    min_size=2, max_size=12))
    def test_matches_pairwise_oracle(self, items):
        try:
            expected = pairwise_alpha(items)
        except ZeroDivisionError:
            with pytest.raises(DegenerateData):
                nominal_alpha(items)
            return
        assert nominal_alpha(items) == pytest.approx(expected, abs=1e-12)

    def test_relabelling_invariance(self):
        rng = random.Random(5)
        items = [tuple(rng.choice("xyz") for _ in range(3)) for _ in range(40)]
        renamed = [tuple({"x": 1, "y": 2, "z": 3}[v] for v in it) for it in items]
        assert nominal_alpha(items) == pytest.approx(nominal_alpha(renamed), abs=1e-12)

    def test_random_labels_near_zero(self):
        rng = random.Random(2024)
        items = [(rng.choice("ABCD"), rng.choice("ABCD")) for _ in range(10_000)]
        assert abs(nominal_alpha(items)) <= 0.05

    def test_single_value_is_degenerate(self):
        with pytest.raises(DegenerateData):
            nominal_alpha([("A", "A"), ("A", None)])


class TestDistanceAlpha:
    TOY = [(Tree("a"), Tree("a")),
           (Tree("a"), Tree("b")),
           (Tree("b"), Tree("b", (Tree("c"),)))]

    def test_toy_by_hand(self):
        # within pairs: 0, 1, 1 -> mean 2/3
        # all 15 pairs: a-a x3 = 0, a-b x6 = 6, a-b(c) x3 = 6, b-b = 0, b-b(c) x2 = 2 -> 14/15
        assert abs(distance_alpha(self.TOY) - 2 / 7) <= 1e-12

    def test_scale_invariance(self):
        scaled = distance_alpha(self.TOY, costs=TedCosts().scaled(3.5))
        assert scaled == pytest.approx(distance_alpha(self.TOY), abs=1e-12)

    def test_identical_annotations(self):
        items = [(t, t) for t in (Tree("a"), Tree("b", (Tree("c"),)))]
        assert distance_alpha(items) == 1.0

    def test_degenerate(self):
        with pytest.raises(DegenerateData):
            distance_alpha([(Tree("a"), Tree("a"))])
        with pytest.raises(ValueError):
            distance_alpha(self.TOY, normalize="sqrt")

    def test_node_normalization(self):
        value = distance_alpha(self.TOY, normalize="nodes")
        # b-b(c) normalizes to 1/1.5, a-b(c) to 2/1.5
        within = (0 + 1 + 1 / 1.5) / 3
        every = (6 * 1 + 3 * (2 / 1.5) + 2 * (1 / 1.5)) / 15
        assert value == pytest.approx(1 - within / every, abs=1e-12)


def grid(labels):
    """Single-row-per-token grid from (depth, start, end, label) tuples."""
    return GridDocument(("a", "b"), tuple(GridCell(d, Span(s, e), lab) for d, s, e, lab in labels))


class TestCellAlpha:
    A = grid([(0, 0, 2, "s"), (1, 0, 1, "subj"), (2, 0, 1, "np")])
    B = grid([(0, 0, 2, "s"), (1, 0, 1, "obj"), (2, 0, 1, "np")])

    def test_self_agreement(self):
        assert cell_alpha(self.A, self.A) == 1.0
        assert cell_alpha(self.A, self.A, self.A) == 1.0

    def test_items_padded(self):
        items = cell_items(self.A, self.B)
        assert ("subj", "obj") in items
        assert (NULL, NULL) in items
        assert len(items) == 2 * 3

    def test_disagreement_lowers_alpha(self):
        assert cell_alpha(self.A, self.B) < 1.0

    def test_errors(self):
        with pytest.raises(DegenerateData):
            cell_items(self.A)
        other = GridDocument(("x", "y"), self.A.cells)
        with pytest.raises(TokenMismatch):
            cell_items(self.A, other)


def test_edit_breakdown():
    _, s1 = tree_edit_distance(Tree("a", (Tree("b"),)), Tree("c", (Tree("b"),)))
    _, s2 = tree_edit_distance(Tree("x", (Tree("y"),)), Tree("x"))
    _, s3 = tree_edit_distance(Tree("a"), Tree("c"))
    report = edit_breakdown([s1, s2, s3])
    assert report.total == 3
    assert report.remove == pytest.approx(1 / 3)
    assert report.update == pytest.approx(2 / 3)
    assert report.update_pairs == [(("a", "c"), 2)]
    assert edit_breakdown([]).total == 0
