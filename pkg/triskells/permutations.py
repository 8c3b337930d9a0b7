"""Permutation enumeration with signatures."""

import itertools
from typing import Iterator, Sequence, Tuple

Permutation = Tuple[int, ...]


def permutation_sign(perm: Sequence[int]) -> int:
    """Signature of a permutation of range(n), by counting cycles."""
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def heap_permutations(n: int) -> Iterator[Tuple[Permutation, int]]:
    """All permutations of range(n) in Heap's order, each with its signature.

    Consecutive permutations differ by one transposition, so the sign flips
    at every step.
    """
    a = list(range(n))
    c = [0] * n
    sign = 1
    yield tuple(a), sign
    i = 1
    while i < n:
        if c[i] < i:
            if i % 2 == 0:
                a[0], a[i] = a[i], a[0]
            else:
                a[c[i]], a[i] = a[i], a[c[i]]
            sign = -sign
            yield tuple(a), sign
            c[i] += 1
            i = 1
        else:
            c[i] = 0
            i += 1


def lexicographic_permutations(n: int) -> Iterator[Tuple[Permutation, int]]:
    for perm in itertools.permutations(range(n)):
        yield perm, permutation_sign(perm)
