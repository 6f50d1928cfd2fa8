import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enskog_series import trees
from enskog_series.errors import CapExceededError, InvalidTreeError


def catalan(n):
    return math.comb(2 * n, n) // (n + 1)


def brute_partial(n):
    """Child-count sequences from every labelled tree, via breadth-first relabelling."""
    out = set()
    for r in itertools.product(*[range(1, i + 1) for i in range(1, n + 1)]):
        kids = {m: [] for m in range(1, n + 2)}
        for i, ri in enumerate(r, start=1):
            kids[ri].append(i + 1)
        order, queue = [], [1]
        while queue:
            node = queue.pop(0)
            order.append(len(kids[node]))
            queue.extend(kids[node])
        out.add(tuple(order[:n]))
    return out


def test_enumerate_full_examples():
    assert trees.enumerate_full(0) == [()]
    assert trees.enumerate_full(2) == [(1, 1), (1, 2)]
    assert (1, 1, 2, 3, 2) in trees.enumerate_full(5)
    assert len(trees.enumerate_full(2, j=2)) == 2 * 3


def test_realizability_examples():
    assert not trees.is_realizable((1, 0, 2, 1))
    assert trees.is_realizable((2, 1, 0))
    assert not trees.is_realizable((0, 1))


def test_enumerate_partial_examples():
    assert trees.enumerate_partial(1) == [(1,)]
    assert sorted(trees.enumerate_partial(2)) == [(1, 1), (2, 0)]
    assert len(trees.enumerate_partial(3)) == 5


@pytest.mark.parametrize("n", range(7))
def test_partial_matches_brute_force(n):
    assert set(trees.enumerate_partial(n)) == (brute_partial(n) if n else {()})


def test_parent_maps():
    assert trees.parent_map((2, 0)) == [1, 1]
    assert not trees.is_realizable((2, 0, 0))
    assert trees.parent_map((1, 1, 1)) == [1, 2, 3]
    assert trees.parent_map((2, 1, 0)) == [1, 1, 2]
    with pytest.raises(InvalidTreeError):
        trees.parent_map((1, 0, 2, 1))


def test_class_of_examples():
    assert trees.class_of((1, 1)) == (2, 0)
    assert trees.class_of((1, 2)) == (1, 1)
    with pytest.raises(InvalidTreeError):
        trees.class_of((2,))


def test_class_size_examples():
    assert trees.class_size((3, 0, 0)) == 1
    assert trees.class_size((2, 1, 0)) == 2


@pytest.mark.parametrize("n", range(8))
def test_class_sizes_partition_factorial(n):
    table = trees.class_table(n)
    assert sum(row["class_size"] for row in table) == math.factorial(n)
    for row in table:
        assert row["class_size"] == len(row["members"])


def test_counts():
    assert trees.count_bound_check(0) == (1, 1)
    assert trees.count_bound_check(3) == (6, 5)
    assert trees.count_bound_check(4) == (24, 14)
    for n in range(1, 9):
        full, partial = trees.count_bound_check(n)
        assert full == math.factorial(n) and partial == catalan(n) < 4 ** n


def test_cap():
    with pytest.raises(CapExceededError):
        trees.enumerate_full(9)
    assert len(trees.enumerate_partial(9, cap=9)) == catalan(9)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6).flatmap(
    lambda n: st.tuples(*[st.integers(1, i) for i in range(1, n + 1)])))
def test_class_of_is_realizable_and_consistent(r):
    k = trees.class_of(r)
    assert trees.is_realizable(k) and sum(k) == len(r)
    # creation constraints of k hold for the relabelled creation order of r
    mapping = trees.relabel_full_to_partial(r)
    rank = {mapping[m]: m for m in mapping}  # K-label -> creation index (larger = later backward)
    for p, q in trees.creation_order_constraints(k):
        assert rank[p] < rank[q]
