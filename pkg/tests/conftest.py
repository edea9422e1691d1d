"""Shared fixtures and text generators for the suite."""

from __future__ import annotations

import itertools
import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from automatch import IidModel

BINARY_PATTERNS = [
    "a", "aa", "ab", "ba",
    "aab", "aba", "abb", "bab",
    "aaaa", "abab", "aabb", "abba",
]

SMALL_PATTERNS = ["a", "aa", "ab", "aab", "aba", "abab"]


def texts_upto(alphabet: str, max_len: int):
    """Every text over `alphabet` of length 0..max_len, shortest first."""
    for ln in range(max_len + 1):
        for tup in itertools.product(alphabet, repeat=ln):
            yield "".join(tup)


def random_texts(alphabet: str, count: int, length: int, seed: int):
    rng = random.Random(seed)
    return ["".join(rng.choices(alphabet, k=length)) for _ in range(count)]


@pytest.fixture(scope="session")
def uniform_binary() -> IidModel:
    return IidModel.uniform("ab")


@pytest.fixture(scope="session")
def skewed_binary() -> IidModel:
    return IidModel({"a": 0.25, "b": 0.75})
