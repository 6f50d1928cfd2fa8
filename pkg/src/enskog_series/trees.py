"""Fully ordered trees r_n and partially ordered trees k_n.

A fully ordered tree is a tuple ``r = (r_1, ..., r_n)`` in which ``r_i`` is
the parent of particle ``j + i``; creation times decrease with ``i``.  A
partially ordered tree is a tuple ``k = (k_1, ..., k_n)`` where ``k_i`` counts
the children of particle ``i``.  Children of particle ``i`` are labelled
``K_i + 1, ..., K_i + k_i`` with ``K_i = 1 + k_1 + ... + k_{i-1}``, listed in
creation order (the first child has the latest creation time).
"""

from __future__ import annotations

import itertools
from collections import deque
from functools import cache

from .errors import CapExceededError, InvalidTreeError

DEFAULT_CAP = 8


def _check_cap(n: int, cap: int) -> None:
    if n < 0:
        raise ValueError("tree order must be non-negative")
    if n > cap:
        raise CapExceededError(f"n={n} exceeds enumeration cap {cap}")


def enumerate_full(n: int, j: int = 1, cap: int = DEFAULT_CAP) -> list[tuple[int, ...]]:
    """All fully ordered trees with ``n`` creations and ``j`` roots, lexicographically."""
    _check_cap(n, cap)
    if j < 1:
        raise ValueError("need at least one root")
    ranges = [range(1, j + i + 1) for i in range(n)]
    return [tuple(r) for r in itertools.product(*ranges)]


def _build_parents(k) -> list[int] | None:
    """Constructive realizability: parent label of particles 2..n+1, or None."""
    n = len(k)
    parents: list[int] = []
    created = 1
    for i, ki in enumerate(k, start=1):
        if ki < 0:
            return None
        if ki == 0:
            continue
        if i > created:
            return None  # particle i would create before being created
        parents.extend([i] * ki)
        created += ki
        if created > n + 1:
            return None
    if created != n + 1:
        return None
    return parents


def is_realizable(k) -> bool:
    k = tuple(k)
    if any(not isinstance(ki, int) for ki in k):
        return False
    if k and k[0] < 1:
        return False
    return _build_parents(k) is not None


def parent_map(k) -> list[int]:
    """Parent label of each particle 2..n+1 (entry ``m - 2`` for particle ``m``)."""
    parents = _build_parents(tuple(k))
    if parents is None or (k and k[0] < 1):
        raise InvalidTreeError(f"tree {tuple(k)} is not realizable")
    return parents


def offsets(k) -> list[int]:
    """The label offsets K_1, ..., K_n."""
    out = []
    acc = 1
    for ki in k:
        out.append(acc)
        acc += ki
    return out


def children(k) -> dict[int, list[int]]:
    """Children of every particle, in creation order (latest creation first)."""
    parents = parent_map(k)
    kids: dict[int, list[int]] = {m: [] for m in range(1, len(k) + 2)}
    for child, parent in enumerate(parents, start=2):
        kids[parent].append(child)
    return kids


def enumerate_partial(n: int, cap: int = DEFAULT_CAP) -> list[tuple[int, ...]]:
    """All realizable partially ordered trees of order ``n``, lexicographically."""
    _check_cap(n, cap)
    if n == 0:
        return [()]
    out: list[tuple[int, ...]] = []

    def extend(prefix: list[int], created: int, remaining: int):
        i = len(prefix) + 1
        if i > n:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        # particle i may create only if it already exists
        top = remaining if i <= created else 0
        for ki in range(top + 1):
            if i == 1 and ki == 0:
                continue
            prefix.append(ki)
            extend(prefix, created + ki, remaining - ki)
            prefix.pop()

    extend([], 1, n)
    out.sort()
    return out


def class_of(r) -> tuple[int, ...]:
    """Partially ordered tree containing the fully ordered tree ``r`` (one root)."""
    r = tuple(r)
    n = len(r)
    for i, ri in enumerate(r, start=1):
        if not 1 <= ri <= i:
            raise InvalidTreeError(f"entry r_{i}={ri} outside 1..{i}")
    kids: dict[int, list[int]] = {m: [] for m in range(1, n + 2)}
    for i, ri in enumerate(r, start=1):
        kids[ri].append(i + 1)
    k = []
    queue = deque([1])
    while queue:
        node = queue.popleft()
        k.append(len(kids[node]))
        queue.extend(kids[node])
    return tuple(k[:n])


def relabel_full_to_partial(r) -> dict[int, int]:
    """Map creation-order labels of ``r`` to the K-offset labels of its class."""
    r = tuple(r)
    n = len(r)
    kids: dict[int, list[int]] = {m: [] for m in range(1, n + 2)}
    for i, ri in enumerate(r, start=1):
        kids[ri].append(i + 1)
    mapping = {}
    queue = deque([1])
    label = 1
    while queue:
        node = queue.popleft()
        mapping[node] = label
        label += 1
        queue.extend(kids[node])
    return mapping


def creation_order_constraints(k) -> list[tuple[int, int]]:
    """Pairs ``(p, q)`` meaning particle p is created before particle q (backward time)."""
    kids = children(k)
    pairs = []
    for parent, cs in kids.items():
        for first, second in zip(cs, cs[1:]):
            pairs.append((first, second))
        if parent != 1:
            for c in cs:
                pairs.append((parent, c))
    return pairs


def class_size(k) -> int:
    """Number of linear extensions of the creation-time partial order of ``k``."""
    k = tuple(k)
    parent_map(k)
    n = len(k)
    if n == 0:
        return 1
    preds: dict[int, int] = {m: 0 for m in range(2, n + 2)}
    for p, q in creation_order_constraints(k):
        preds[q] |= 1 << p
    labels = list(range(2, n + 2))
    full = sum(1 << m for m in labels)

    @cache
    def count(done: int) -> int:
        if done == full:
            return 1
        total = 0
        for m in labels:
            bit = 1 << m
            if done & bit:
                continue
            if preds[m] & ~done:
                continue
            total += count(done | bit)
        return total

    return count(0)


def count_bound_check(n: int, cap: int = DEFAULT_CAP) -> tuple[int, int]:
    """(number of fully ordered trees, number of partially ordered trees), by enumeration."""
    return len(enumerate_full(n, 1, cap)), len(enumerate_partial(n, cap))


def class_table(n: int, cap: int = DEFAULT_CAP) -> list[dict]:
    """Every partial tree of order n with its class size and members."""
    members: dict[tuple[int, ...], list[tuple[int, ...]]] = {
        k: [] for k in enumerate_partial(n, cap)
    }
    for r in enumerate_full(n, 1, cap):
        members[class_of(r)].append(r)
    return [
        {"k": list(k), "class_size": class_size(k), "members": [list(r) for r in rs]}
        for k, rs in members.items()
    ]
