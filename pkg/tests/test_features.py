import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brilliancy.board import Move, startpos
from brilliancy.features import (
    CHILD_OFF, DATUM_LEN, DEFAULT_EVALUATOR_ORDER, GROUPS_OFF, PARENT_OFF,
    SUB_IDX_MAX_Q, SUB_IDX_Q, SUBTREE_LEN, TREE_LEN, WEAK_POST_Q_INDICES,
    classify_root_moves, datum_features, fill_vector, load_feature_matrix,
    save_feature_matrix, subtree_features, tree_features,
)
from brilliancy.mcts import SearchTree, TreeNode

from oracle_features import ref_datum, ref_subtree, ref_tree
from util_trees import random_tree, some_root_move


def make_node(move=None, q=0.0, visits=1, prior=1.0, children=()):
    return TreeNode(move=move, prior=prior, visits=visits,
                    value_sum=q * visits, terminal=False,
                    children=tuple(children))


def make_tree(root, evaluator="strong", budget=10):
    return SearchTree(root=root, root_position=startpos(), budget=budget,
                      evaluator_name=evaluator, seed=0, c_puct=1.5,
                      eval_paths=())


def mv(i):
    return Move(i, (i + 8) % 64, 0)


class TestClassifyRootMoves:
    def tree_with_children(self, q_root, child_qs_mover, moi_index=None):
        # children store their own-perspective q, i.e. the negation
        children = [make_node(move=mv(i), q=-qm, visits=3)
                    for i, qm in enumerate(child_qs_mover)]
        root = make_node(q=q_root, visits=10, children=children)
        moi = children[moi_index].move if moi_index is not None else None
        return make_tree(root), moi

    def test_spec_example(self):
        tree, _ = self.tree_with_children(0.2, [0.5, 0.1, -0.3])
        c = classify_root_moves(tree, None)
        by_move = {m: (q, dq) for m, q, dq in c.moves}
        assert set(c.increasing) == {mv(0)}
        assert set(c.advantage) == {mv(0), mv(1)}
        assert set(c.decreasing) == {mv(1), mv(2)}
        assert set(c.disadvantage) == {mv(2)}
        assert by_move[mv(0)][0] == pytest.approx(0.5)

    def test_moi_excluded(self):
        tree, moi = self.tree_with_children(0.2, [0.5], moi_index=0)
        c = classify_root_moves(tree, moi)
        assert c.moves == ()
        assert c.increasing == c.advantage == ()
        assert c.decreasing == c.disadvantage == ()

    def test_equal_q_is_decreasing(self):
        # dyadic values survive the value_sum/visits round trip exactly
        tree, _ = self.tree_with_children(0.25, [0.25])
        c = classify_root_moves(tree, None)
        assert set(c.decreasing) == {mv(0)}
        assert c.increasing == ()

    def test_partition_properties(self):
        tree, _ = self.tree_with_children(0.1, [0.4, -0.2, 0.1, 0.0, -0.9])
        c = classify_root_moves(tree, None)
        all_moves = {m for m, _, _ in c.moves}
        assert set(c.increasing) | set(c.decreasing) == all_moves
        assert set(c.increasing) & set(c.decreasing) == set()
        assert set(c.advantage) | set(c.disadvantage) == all_moves
        assert set(c.advantage) & set(c.disadvantage) == set()


class TestSubtreeFeatures:
    def test_leaf(self):
        leaf = make_node(move=mv(0), q=0.3, visits=7, prior=0.25)
        out = subtree_features(leaf, -1)
        assert out[SUB_IDX_Q] == pytest.approx(-0.3)
        assert out[SUB_IDX_MAX_Q] == -1.0
        assert out[6] == 0.25
        assert out[7] == 7
        assert out[8] == 0.0 and out[9] == 0.0
        assert np.all(out[10:21] == 0)
        assert out[21] == 0

    def test_root_with_three_leaf_children(self):
        children = [make_node(move=mv(i), q=0.0, visits=1, prior=0.3)
                    for i in range(3)]
        root = make_node(q=0.1, visits=4, children=children)
        out = subtree_features(root, +1)
        assert out[10] == pytest.approx(3.0)   # branching factor
        assert out[11] == 3                     # width at depth 1
        assert out[12] == 0
        assert out[18] == pytest.approx(3.0)    # mean width
        assert out[19] == pytest.approx(0.0)    # std
        assert out[20] == pytest.approx(3.0)    # max
        assert out[21] == 1                     # height

    def test_matches_reference_on_random_trees(self):
        for seed in range(30):
            tree = random_tree(seed, max_nodes=60)
            got = subtree_features(tree.root, +1)
            want = ref_subtree(tree.root, +1)
            assert np.array_equal(got, want), seed


class TestTreeFeatures:
    def test_fill_vector_shape(self):
        fv = fill_vector()
        assert fv.shape == (SUBTREE_LEN,)
        assert fv[SUB_IDX_Q] == -1.0 and fv[SUB_IDX_MAX_Q] == -1.0
        assert np.count_nonzero(fv) == 2

    def test_length_398_always(self):
        for seed in (0, 1, 2, 3):
            tree = random_tree(seed)
            out = tree_features(tree, some_root_move(tree, seed % 2 == 0, seed))
            assert out.shape == (TREE_LEN,)

    def test_missing_move_gets_fill_and_no_best(self):
        tree = random_tree(5)
        absent = some_root_move(tree, present=False)
        out = tree_features(tree, absent)
        assert out[0] == 0.0 and out[1] == 0.0
        assert np.array_equal(out[CHILD_OFF:CHILD_OFF + SUBTREE_LEN],
                              fill_vector())

    def test_single_member_group_aggregates(self):
        # root with two children; one is the move of interest, so exactly
        # one child is classified and every group it joins has one member
        moi_child = make_node(move=mv(0), q=0.5, visits=2, prior=0.6)
        other = make_node(move=mv(1), q=-0.4, visits=3, prior=0.4)
        root = make_node(q=0.1, visits=6, children=[moi_child, other])
        out = tree_features(make_tree(root), mv(0))
        member = subtree_features(other, -1)
        # other has q_mover = 0.4 > q_root=0.1 -> increasing + advantage
        inc = out[GROUPS_OFF:GROUPS_OFF + 4 * SUBTREE_LEN]
        mean, std, mn, mx = (inc[i * SUBTREE_LEN:(i + 1) * SUBTREE_LEN]
                             for i in range(4))
        assert np.array_equal(mean, member)
        assert np.array_equal(mn, member)
        assert np.array_equal(mx, member)
        assert np.all(std == 0)

    def test_empty_groups_filled(self):
        root = make_node(q=0.0, visits=2,
                         children=[make_node(move=mv(0), q=0.1, visits=1)])
        out = tree_features(make_tree(root), mv(0))  # moi is the only child
        fv = fill_vector()
        for g in range(4):
            for a in range(4):
                off = GROUPS_OFF + (g * 4 + a) * SUBTREE_LEN
                assert np.array_equal(out[off:off + SUBTREE_LEN], fv)

    def test_is_best_tie_breaks(self):
        # equal q: higher visits wins
        a = make_node(move=mv(0), q=-0.5, visits=2, prior=0.5)
        b = make_node(move=mv(1), q=-0.5, visits=5, prior=0.5)
        root = make_node(q=0.0, visits=8, children=[a, b])
        assert tree_features(make_tree(root), mv(1))[1] == 1.0
        assert tree_features(make_tree(root), mv(0))[1] == 0.0
        # equal q and visits: earlier canonical child wins
        c = make_node(move=mv(2), q=-0.5, visits=5, prior=0.5)
        root2 = make_node(q=0.0, visits=11, children=[b, c])
        assert tree_features(make_tree(root2), mv(1))[1] == 1.0

    def test_matches_reference(self):
        for seed in range(40):
            tree = random_tree(seed, max_nodes=80)
            moi = some_root_move(tree, present=seed % 3 != 0, seed=seed)
            got = tree_features(tree, moi)
            want = ref_tree(tree, moi)
            assert np.array_equal(got, want), seed


class TestDatumFeatures:
    def blocks(self, budgets=(1, 2, 4, 8, 16)):
        trees = []
        for e_idx, name in enumerate(DEFAULT_EVALUATOR_ORDER):
            for b_idx, budget in enumerate(budgets):
                trees.append(random_tree(100 + e_idx * 10 + b_idx,
                                         max_nodes=30, evaluator=name,
                                         budget=budget))
        return trees

    def test_length_3980(self):
        trees = self.blocks()
        datum = datum_features(trees, Move(0, 8, 0))
        assert datum.values.shape == (DATUM_LEN,)

    def test_missing_block_error(self):
        trees = self.blocks()
        dropped = [t for t in trees
                   if not (t.evaluator_name == "weak" and t.budget == 8)]
        with pytest.raises(ValueError, match=r"missing block \(weak, 8\)"):
            datum_features(dropped, Move(0, 8, 0))

    def test_duplicate_block_error(self):
        trees = self.blocks()
        with pytest.raises(ValueError, match="duplicate block"):
            datum_features(trees + [trees[0]], Move(0, 8, 0))

    def test_permutation_invariance(self):
        trees = self.blocks()
        moi = Move(0, 8, 0)
        a = datum_features(trees, moi)
        b = datum_features(list(reversed(trees)), moi)
        assert np.array_equal(a.values, b.values)

    def test_matches_reference(self):
        trees = self.blocks()
        moi = Move(0, 8, 0)
        got = datum_features(trees, moi).values
        want = ref_datum(trees, moi, DEFAULT_EVALUATOR_ORDER, (1, 2, 4, 8, 16))
        assert np.array_equal(got, want)

    def test_weak_post_q_indices(self):
        assert WEAK_POST_Q_INDICES == (2018, 2416, 2814, 3212, 3610)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_aggregate_ordering_property(seed):
    tree = random_tree(seed, max_nodes=50)
    out = tree_features(tree, some_root_move(tree, True, seed))
    for g in range(4):
        base = GROUPS_OFF + g * 4 * SUBTREE_LEN
        mean = out[base:base + SUBTREE_LEN]
        std = out[base + SUBTREE_LEN:base + 2 * SUBTREE_LEN]
        mn = out[base + 2 * SUBTREE_LEN:base + 3 * SUBTREE_LEN]
        mx = out[base + 3 * SUBTREE_LEN:base + 4 * SUBTREE_LEN]
        if np.array_equal(std, fill_vector()):
            continue  # empty group: all four slots hold the fill vector
        assert np.all(mn <= mean + 1e-12)
        assert np.all(mean <= mx + 1e-12)
        assert np.all(std >= 0)


def negate_values(node):
    return TreeNode(move=node.move, prior=node.prior, visits=node.visits,
                    value_sum=-node.value_sum, terminal=node.terminal,
                    children=tuple(negate_values(c) for c in node.children))


def test_value_negation_flips_q_features():
    tree = random_tree(11, max_nodes=40)
    flipped = make_tree(negate_values(tree.root))
    moi = some_root_move(tree, True, 1)
    a = tree_features(tree, moi)
    b = tree_features(flipped, moi)
    q_parent = PARENT_OFF + SUB_IDX_Q
    assert a[q_parent] == pytest.approx(-b[q_parent])
    assert abs(a[q_parent]) == pytest.approx(abs(b[q_parent]))


def test_matrix_round_trip(tmp_path):
    rows = [{"game_id": "g", "ply": i, "label": "other"} for i in range(3)]
    matrix = np.random.default_rng(0).normal(size=(3, DATUM_LEN))
    path = tmp_path / "features.bin"
    save_feature_matrix(path, matrix, rows, ("strong", "weak"),
                        (1, 2, 4, 8, 16), "abc123")
    loaded, sidecar = load_feature_matrix(path)
    assert loaded.shape == (3, DATUM_LEN)
    assert sidecar["rows"] == rows
    assert np.allclose(loaded, matrix, atol=1e-6)  # float32 round trip
