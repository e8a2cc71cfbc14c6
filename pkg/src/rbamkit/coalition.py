"""Subset-lattice primitives.

A :class:`Coalition` is a subset of the player set ``[d] = {1, ..., d}``
stored as a bitmask: player ``i`` maps to bit ``i - 1``.  Every table in the
package (games, removal values, decomposition components) is indexed by this
bitmask, and every enumeration runs in increasing bitmask order so that
serialized output is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

MAX_PLAYERS = 24


def _check_d(d: int) -> None:
    if not isinstance(d, int) or d < 1 or d > MAX_PLAYERS:
        raise ValueError(f"player count must be an int in [1, {MAX_PLAYERS}], got {d!r}")


@dataclass(frozen=True, order=True)
class Coalition:
    """Subset of ``[d]`` as a fixed-width bitmask."""

    bits: int
    d: int

    def __post_init__(self) -> None:
        _check_d(self.d)
        if self.bits < 0 or self.bits >> self.d:
            raise ValueError(f"bitmask {self.bits:#x} has members outside [1, {self.d}]")

    @classmethod
    def of(cls, d: int, players: Iterable[int] = ()) -> "Coalition":
        bits = 0
        for i in players:
            if not 1 <= i <= d:
                raise ValueError(f"player {i} outside [1, {d}]")
            bits |= 1 << (i - 1)
        return cls(bits, d)

    @classmethod
    def empty(cls, d: int) -> "Coalition":
        return cls(0, d)

    @classmethod
    def full(cls, d: int) -> "Coalition":
        return cls((1 << d) - 1, d)

    @classmethod
    def parse(cls, text: str, d: int) -> "Coalition":
        """Parse the text form ``"1,3"`` (``""`` is the empty coalition)."""
        text = text.strip()
        if text in ("", "∅", "{}"):
            return cls(0, d)
        try:
            players = [int(tok) for tok in text.strip("{}").split(",")]
        except ValueError:
            raise ValueError(f"malformed coalition {text!r}") from None
        if len(set(players)) != len(players):
            raise ValueError(f"duplicate players in coalition {text!r}")
        return cls.of(d, players)

    @property
    def players(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in range(self.d) if self.bits >> i & 1)

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[int]:
        return iter(self.players)

    def __contains__(self, i: object) -> bool:
        return isinstance(i, int) and 1 <= i <= self.d and bool(self.bits >> (i - 1) & 1)

    def _same_d(self, other: "Coalition") -> None:
        if other.d != self.d:
            raise ValueError(f"dimension mismatch: {self.d} vs {other.d}")

    def __or__(self, other: "Coalition") -> "Coalition":
        self._same_d(other)
        return Coalition(self.bits | other.bits, self.d)

    def __and__(self, other: "Coalition") -> "Coalition":
        self._same_d(other)
        return Coalition(self.bits & other.bits, self.d)

    def __sub__(self, other: "Coalition") -> "Coalition":
        self._same_d(other)
        return Coalition(self.bits & ~other.bits, self.d)

    def with_player(self, i: int) -> "Coalition":
        return self | Coalition.of(self.d, [i])

    def without_player(self, i: int) -> "Coalition":
        return self - Coalition.of(self.d, [i])

    def complement(self) -> "Coalition":
        return Coalition(((1 << self.d) - 1) ^ self.bits, self.d)

    def issubset(self, other: "Coalition") -> bool:
        self._same_d(other)
        return self.bits & ~other.bits == 0

    def is_strict_subset(self, other: "Coalition") -> bool:
        return self.issubset(other) and self.bits != other.bits

    def key(self) -> str:
        """Text form used as a JSON key: ascending players joined by commas."""
        return ",".join(str(i) for i in self.players)

    def __str__(self) -> str:
        return "{" + self.key() + "}"


def subsets_of(c: Coalition) -> list[Coalition]:
    """All subsets of ``c`` in increasing bitmask order."""
    return [Coalition(b, c.d) for b in subset_masks(c.bits)]


def subset_masks(mask: int) -> list[int]:
    """Submasks of ``mask`` in increasing numeric order."""
    out = []
    sub = 0
    while True:
        out.append(sub)
        if sub == mask:
            return out
        # next submask in increasing order
        sub = (sub - mask) & mask


def all_coalitions(d: int) -> list[Coalition]:
    _check_d(d)
    return [Coalition(b, d) for b in range(1 << d)]


def coalitions_up_to(d: int, order: int, *, include_empty: bool = False) -> list[Coalition]:
    """Coalitions with ``1 <= |S| <= order`` (optionally ``∅``), increasing bitmask."""
    lo = 0 if include_empty else 1
    return [c for c in all_coalitions(d) if lo <= c.size <= order]


@dataclass(frozen=True)
class Permutation:
    """Bijection of ``[d]``; ``mapping[i - 1]`` is ``π(i)``.

    ``Permutation((2, 3, 1))`` sends 1→2, 2→3, 3→1.
    """

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "mapping", tuple(int(v) for v in self.mapping))
        d = len(self.mapping)
        _check_d(d)
        if sorted(self.mapping) != list(range(1, d + 1)):
            raise ValueError(f"not a permutation of [1, {d}]: {self.mapping}")

    @classmethod
    def identity(cls, d: int) -> "Permutation":
        return cls(tuple(range(1, d + 1)))

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        return cls(tuple(int(t) for t in text.strip("()[] ").split(",")))

    @property
    def d(self) -> int:
        return len(self.mapping)

    def __call__(self, i: int) -> int:
        return self.mapping[i - 1]

    def compose(self, other: "Permutation") -> "Permutation":
        """``self ∘ other``: apply ``other`` first."""
        if other.d != self.d:
            raise ValueError(f"dimension mismatch: {self.d} vs {other.d}")
        return Permutation(tuple(self(other(i)) for i in range(1, self.d + 1)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.d
        for i, p in enumerate(self.mapping, start=1):
            inv[p - 1] = i
        return Permutation(tuple(inv))

    def order_of_arrival(self) -> tuple[int, ...]:
        """Players listed by position, reading ``mapping`` as an arrival order."""
        return self.mapping

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.mapping)) + ")"


def apply_permutation(pi: Permutation, c: Coalition) -> Coalition:
    """``πS = {π(i) : i ∈ S}``."""
    if pi.d != c.d:
        raise ValueError(f"dimension mismatch: permutation on {pi.d}, coalition on {c.d}")
    return Coalition.of(c.d, (pi(i) for i in c.players))


def permute_mask(pi: Permutation, mask: int) -> int:
    out = 0
    for i in range(pi.d):
        if mask >> i & 1:
            out |= 1 << (pi.mapping[i] - 1)
    return out


class SetFamily:
    """Duplicate-free collection of coalitions over a common ``d``."""

    __slots__ = ("_members", "d")

    def __init__(self, members: Iterable[Coalition], d: int | None = None):
        uniq = sorted(set(members), key=lambda c: c.bits)
        dims = {c.d for c in uniq}
        if d is not None:
            dims.add(d)
        if len(dims) > 1:
            raise ValueError(f"family mixes dimensions {sorted(dims)}")
        self.d = dims.pop() if dims else None
        self._members = tuple(uniq)

    @classmethod
    def of(cls, d: int, sets: Iterable[Sequence[int]]) -> "SetFamily":
        return cls((Coalition.of(d, s) for s in sets), d)

    @property
    def members(self) -> tuple[Coalition, ...]:
        return self._members

    def __iter__(self) -> Iterator[Coalition]:
        return iter(self._members)

    def __len__(self) -> int:
        return len(self._members)

    def __contains__(self, c: object) -> bool:
        return c in self._members

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SetFamily):
            return NotImplemented
        return self._members == other._members

    def __hash__(self) -> int:
        return hash(self._members)

    def as_lists(self) -> list[list[int]]:
        return [list(c.players) for c in self._members]

    def __repr__(self) -> str:
        return "SetFamily(" + ", ".join(str(c) for c in self._members) + ")"


def ceiling(family: SetFamily) -> SetFamily:
    """Maximal members of ``family`` under inclusion."""
    members = family.members
    top = [s for s in members if not any(s.is_strict_subset(t) for t in members)]
    return SetFamily(top, family.d)


def is_antichain(family: SetFamily) -> bool:
    members = family.members
    return not any(s.is_strict_subset(t) for s in members for t in members)
