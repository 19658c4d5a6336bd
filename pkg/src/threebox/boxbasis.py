"""Unperturbed product states of three particles in the box ``|q| < 1``.

A product state ``phi_n1(x) phi_n2(y) phi_n3(z)`` with
``phi_n(q) = sin(n pi (q + 1) / 2)`` has energy ``(pi^2/4)(n1^2 + n2^2 + n3^2)``.
All energy bookkeeping is done on the exact integer ``n1^2 + n2^2 + n3^2``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

MAX_CUTOFF = 10**6

ENERGY_UNIT = math.pi**2 / 4.0


@dataclass(frozen=True, order=True)
class ModeTriple:
    """Box quantum numbers ``(n1, n2, n3)`` of one product state."""

    n1: int
    n2: int
    n3: int

    def __post_init__(self):
        for n in (self.n1, self.n2, self.n3):
            if not isinstance(n, int) or n < 1:
                raise ValueError(f"box quantum numbers must be integers >= 1, got {self.as_tuple()}")

    def __iter__(self) -> Iterator[int]:
        return iter((self.n1, self.n2, self.n3))

    def __getitem__(self, i: int) -> int:
        return (self.n1, self.n2, self.n3)[i]

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)

    @property
    def energy_sum(self) -> int:
        return self.n1 * self.n1 + self.n2 * self.n2 + self.n3 * self.n3

    def label(self) -> str:
        return f"{self.n1},{self.n2},{self.n3}"


def mode_energy(t: ModeTriple) -> float:
    """Exact unperturbed energy of a product state."""
    return ENERGY_UNIT * t.energy_sum


@dataclass(frozen=True)
class Multiplet:
    """All distinct permutations of one sorted triple.

    ``triples`` is ordered descending-lexicographically, so the first member is
    the sorted-descending representative ``key``.
    """

    energy_sum: int
    key: tuple[int, int, int]
    triples: tuple[ModeTriple, ...]

    @property
    def orbit_size(self) -> int:
        return len(self.triples)

    @property
    def energy(self) -> float:
        return ENERGY_UNIT * self.energy_sum

    @classmethod
    def from_triple(cls, t) -> "Multiplet":
        key = tuple(sorted(tuple(t), reverse=True))
        perms = sorted(set(itertools.permutations(key)), reverse=True)
        triples = tuple(ModeTriple(*p) for p in perms)
        return cls(energy_sum=triples[0].energy_sum, key=key, triples=triples)

    def __len__(self) -> int:
        return len(self.triples)


def enumerate_states(max_energy_sum: int) -> list[Multiplet]:
    """All multiplets with ``n1^2 + n2^2 + n3^2 <= max_energy_sum``.

    Sorted by energy sum, ties (Pythagorean coincidences) broken by the
    sorted-descending triple. Truncation never splits a multiplet.
    """
    if max_energy_sum < 3:
        raise ValueError("max_energy_sum must be >= 3")
    if max_energy_sum > MAX_CUTOFF:
        raise ValueError(f"max_energy_sum must be <= {MAX_CUTOFF}")
    nmax = math.isqrt(max_energy_sum - 2)
    out = []
    for a in range(1, nmax + 1):
        for b in range(1, a + 1):
            for c in range(1, b + 1):
                if a * a + b * b + c * c <= max_energy_sum:
                    out.append(Multiplet.from_triple((a, b, c)))
    out.sort(key=lambda m: (m.energy_sum, m.key))
    return out


def max_mode(max_energy_sum: int) -> int:
    """Largest single-particle quantum number reachable under the cutoff."""
    return math.isqrt(max_energy_sum - 2)


# Pattern classes of the parity signature, keyed by (number of odd functions,
# whether the even-function modes coincide, whether the odd-function modes coincide).
PARITY_CLASS_IRREPS: dict[str, tuple[str, ...]] = {
    "{e,e,e}": ("A1g",),
    "{e',e,e}": ("A1g", "Eg"),
    "{e',e'',e'''}": ("A1g", "A2g", "Eg", "Eg"),
    "{o,e,e}": ("A2u", "Eu"),
    "{o,e',e''}": ("A1u", "A2u", "Eu", "Eu"),
    "{e,o,o}": ("A1g", "Eg"),
    "{o,o',e}": ("A1g", "A2g", "Eg", "Eg"),
    "{o,o,o}": ("A2u",),
    "{o',o,o}": ("A2u", "Eu"),
    "{o,o',o''}": ("A1u", "A2u", "Eu", "Eu"),
}


@dataclass(frozen=True)
class ParitySignature:
    """Per-mode function parity: ``e`` for odd ``n`` (even function), ``o`` for even ``n``.

    ``symbols`` keeps the primes that distinguish unequal modes of the same
    parity, in the order of the triple; ``pattern`` is the permutation class.
    """

    symbols: tuple[str, str, str]
    pattern: str

    @property
    def is_gerade(self) -> bool:
        return sum(s.startswith("o") for s in self.symbols) % 2 == 0


def parity_signature(t: ModeTriple) -> ParitySignature:
    primes = ("", "'", "''")
    symbols: list[str] = [""] * 3
    for letter, want_odd_n in (("e", True), ("o", False)):
        values: list[int] = []
        for i, n in enumerate(t):
            if (n % 2 == 1) == want_odd_n:
                if n not in values:
                    values.append(n)
                symbols[i] = letter + primes[values.index(n)]

    n_o = sum(1 for n in t if n % 2 == 0)
    distinct_e = len({n for n in t if n % 2 == 1})
    distinct_o = len({n for n in t if n % 2 == 0})
    if n_o == 0:
        pattern = {1: "{e,e,e}", 2: "{e',e,e}", 3: "{e',e'',e'''}"}[distinct_e]
    elif n_o == 3:
        pattern = {1: "{o,o,o}", 2: "{o',o,o}", 3: "{o,o',o''}"}[distinct_o]
    elif n_o == 1:
        pattern = "{o,e,e}" if distinct_e == 1 else "{o,e',e''}"
    else:
        pattern = "{e,o,o}" if distinct_o == 1 else "{o,o',e}"
    return ParitySignature(symbols=tuple(symbols), pattern=pattern)
