"""Lazily evaluated, memoized infinite sequences.

Every infinite object in this package (digit streams, sequence values) is
backed by a :class:`MemoSeq`.  Producers must be deterministic; the memo is
then observationally transparent and the same index always yields the same
item, from any thread.
"""

from __future__ import annotations

import itertools
import threading
from typing import Callable, Iterator, TypeVar

T = TypeVar("T")


class MemoSeq:
    """An infinite sequence fed by an iterator, memoized prefix by prefix.

    The producer iterator is advanced under a lock, so concurrent queries
    extend the memo exactly once per index.
    """

    __slots__ = ("_memo", "_it", "_lock")

    def __init__(self, items: Iterator[T]):
        self._memo: list[T] = []
        self._it = items
        self._lock = threading.Lock()

    def at(self, i: int) -> T:
        if i < 0:
            raise IndexError(f"sequence index must be nonnegative, got {i}")
        if i >= len(self._memo):
            with self._lock:
                while len(self._memo) <= i:
                    self._memo.append(next(self._it))
        return self._memo[i]

    def prefix(self, n: int) -> list[T]:
        if n > 0:
            self.at(n - 1)
        return self._memo[:n]


def from_function(f: Callable[[int], T]) -> MemoSeq:
    """Memoized sequence whose item at i is f(i)."""
    return MemoSeq(f(i) for i in itertools.count())


def constant(item: T) -> MemoSeq:
    return MemoSeq(itertools.repeat(item))


def cons(head: T, tail: MemoSeq) -> MemoSeq:
    def gen() -> Iterator[T]:
        yield head
        for i in itertools.count():
            yield tail.at(i)

    return MemoSeq(gen())
