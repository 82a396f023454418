"""Alphabets, Hamming metrics, distance bounds and position weight matrices.

Everything here is a pure function of its inputs. Symbols are encoded as
integers ``1..|alphabet|``; positions are 0-based.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class InstanceError(ValueError):
    """Raised for malformed closest string instances."""


@dataclass(frozen=True)
class Alphabet:
    symbols: str = "ACGT"

    def __post_init__(self):
        if len(self.symbols) < 2:
            raise InstanceError("an alphabet needs at least two symbols")
        if len(set(self.symbols)) != len(self.symbols):
            raise InstanceError(f"duplicate symbols in alphabet {self.symbols!r}")

    def __len__(self) -> int:
        return len(self.symbols)

    def code(self, ch: str) -> int:
        idx = self.symbols.find(ch)
        if idx < 0 or len(ch) != 1:
            raise InstanceError(f"symbol {ch!r} is not in alphabet {self.symbols!r}")
        return idx + 1

    def symbol(self, code: int) -> str:
        if not 1 <= code <= len(self.symbols):
            raise InstanceError(f"code {code} outside 1..{len(self.symbols)}")
        return self.symbols[code - 1]

    @property
    def codes(self) -> range:
        return range(1, len(self.symbols) + 1)

    def decode(self, row: Iterable[int]) -> str:
        return "".join(self.symbols[int(c) - 1] for c in row)


DNA = Alphabet("ACGT")


@dataclass(frozen=True, eq=False)
class StringSet:
    """N equal-length strings stored as an ``(N, L)`` array of symbol codes."""

    alphabet: Alphabet
    codes: np.ndarray

    def __post_init__(self):
        arr = np.array(self.codes, dtype=np.int8, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InstanceError("a string set needs N >= 1 strings of length L >= 1")
        if arr.min() < 1 or arr.max() > len(self.alphabet):
            raise InstanceError("string set contains codes outside the alphabet")
        arr.setflags(write=False)
        object.__setattr__(self, "codes", arr)

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    @property
    def length(self) -> int:
        return self.codes.shape[1]

    def strings(self) -> list[str]:
        return [self.alphabet.decode(row) for row in self.codes]

    def __eq__(self, other):
        if not isinstance(other, StringSet):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.codes, other.codes)

    def __hash__(self):
        return hash((self.alphabet, self.codes.tobytes(), self.codes.shape))

    def __repr__(self):
        return f"StringSet({self.strings()!r}, alphabet={self.alphabet.symbols!r})"


@dataclass(frozen=True)
class BoundInterval:
    d_low: int
    d_high: int

    def __post_init__(self):
        if not 0 <= self.d_low <= self.d_high:
            raise InstanceError(f"invalid bound interval [{self.d_low}, {self.d_high}]")


@dataclass(frozen=True, eq=False)
class PWM:
    """Position weight matrix: ``counts[c - 1, j]`` rows with symbol ``c`` at column ``j``."""

    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts[:, 0].sum())

    @property
    def length(self) -> int:
        return self.counts.shape[1]

    def __eq__(self, other):
        if not isinstance(other, PWM):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)


def encode_strings(raw: Sequence[str], alphabet: Alphabet = DNA) -> StringSet:
    """Encode character strings as a :class:`StringSet`, preserving row order."""
    raw = list(raw)
    if not raw:
        raise InstanceError("no strings given")
    length = len(raw[0])
    if length == 0:
        raise InstanceError("strings must have length >= 1")
    rows = []
    for k, s in enumerate(raw):
        if len(s) != length:
            raise InstanceError(
                f"string {k + 1} has length {len(s)}, expected {length}"
            )
        rows.append([alphabet.code(ch) for ch in s])
    return StringSet(alphabet, np.array(rows, dtype=np.int8))


def hamming_distance(a: Sequence, b: Sequence) -> int:
    if len(a) != len(b):
        raise ValueError(f"hamming_distance on unequal lengths {len(a)} and {len(b)}")
    if isinstance(a, str) or isinstance(b, str):
        return sum(x != y for x, y in zip(a, b))
    return int(np.count_nonzero(np.asarray(a) != np.asarray(b)))


def pairwise_distances(strings: StringSet) -> np.ndarray:
    c = strings.codes
    return (c[:, None, :] != c[None, :, :]).sum(axis=2)


def hamming_diameter(strings: StringSet) -> int:
    return int(pairwise_distances(strings).max())


def max_distance(candidate: Sequence[int], strings: StringSet) -> int:
    """Largest Hamming distance from an encoded candidate to any row."""
    cand = np.asarray(candidate, dtype=np.int8)
    return int((strings.codes != cand[None, :]).sum(axis=1).max())


def distance_lower_bound(strings: StringSet) -> int:
    """``ceil(HD / 2)``: no string is closer than this to every row."""
    return (hamming_diameter(strings) + 1) // 2


def position_domains(strings: StringSet) -> list[frozenset[int]]:
    """Symbols occurring in each column; a closest string can be built from these alone."""
    return [frozenset(int(c) for c in np.unique(col)) for col in strings.codes.T]


def build_pwm(strings: StringSet) -> PWM:
    sigma = len(strings.alphabet)
    counts = np.zeros((sigma, strings.length), dtype=np.int64)
    for code in range(1, sigma + 1):
        counts[code - 1] = (strings.codes == code).sum(axis=0)
    counts.setflags(write=False)
    return PWM(counts)


def _tie_keys(size: int, seed: int | None) -> list[int]:
    keys = list(range(size))
    if seed is not None:
        random.Random(seed).shuffle(keys)
    return keys


def pwm_variable_order(pwm: PWM, seed: int | None = None) -> list[int]:
    """Positions by descending column maximum.

    Ties go to the lowest position, or are broken by a seeded shuffle when
    ``seed`` is given.
    """
    maxima = pwm.counts.max(axis=0)
    ties = _tie_keys(pwm.length, seed)
    return sorted(range(pwm.length), key=lambda j: (-int(maxima[j]), ties[j]))


def pwm_value_order(
    pwm: PWM, position: int, domain: Iterable[int], seed: int | None = None
) -> list[int]:
    """Symbols of ``domain`` by descending count at ``position``.

    Symbols absent from the column (count 0) naturally sort last.
    """
    domain = list(domain)
    if not domain:
        raise ValueError("empty domain")
    sigma = pwm.counts.shape[0]
    if any(not 1 <= c <= sigma for c in domain):
        raise ValueError(f"domain {domain} has codes outside 1..{sigma}")
    col = pwm.counts[:, position]
    ties = _tie_keys(sigma, None if seed is None else seed + 7919 * (position + 1))
    return sorted(domain, key=lambda c: (-int(col[c - 1]), ties[c - 1]))
