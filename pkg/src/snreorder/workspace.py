"""Allocation-counting harness for working-storage comparisons.

Counts are in array elements ("words"), not bytes, so they are independent of
dtype choices and portable across platforms. Methods register the auxiliary
arrays they materialize; immutable inputs and returned outputs are not
counted.
"""

from __future__ import annotations

from contextlib import contextmanager

__all__ = ["AllocationMeter"]


class AllocationMeter:
    def __init__(self):
        self.current = 0
        self.peak = 0
        self.float_current = 0
        self.float_peak = 0

    def alloc(self, words: int, floating: bool = False) -> int:
        words = int(words)
        self.current += words
        self.peak = max(self.peak, self.current)
        if floating:
            self.float_current += words
            self.float_peak = max(self.float_peak, self.float_current)
        return words

    def release(self, words: int, floating: bool = False) -> None:
        self.current -= int(words)
        if floating:
            self.float_current -= int(words)

    def track(self, array, floating: bool = False):
        """Register a numpy array and return it unchanged."""
        self.alloc(array.size, floating=floating)
        return array

    @contextmanager
    def scope(self, words: int, floating: bool = False):
        self.alloc(words, floating=floating)
        try:
            yield
        finally:
            self.release(words, floating=floating)

    @contextmanager
    def scoped(self):
        """Release everything allocated inside the block when it exits."""
        saved, saved_float = self.current, self.float_current
        try:
            yield
        finally:
            self.current, self.float_current = saved, saved_float
