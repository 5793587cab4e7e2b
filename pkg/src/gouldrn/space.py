"""Finite measurable spaces and the refinement order on partitions.

A :class:`FiniteSpace` has points and atoms (a partition of the points);
its algebra consists of all unions of atoms.  Measurable sets are stored
as bit masks over atom indices.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

from .errors import CarrierMismatch, TooLarge

DEFAULT_MAX_ATOMS = 10
DEFAULT_MAX_TAG_CHOICES = 10**6


def bits(mask: int):
    """Indices of the set bits of ``mask``, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def submasks(mask: int):
    """All submasks of ``mask`` including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


@dataclass(frozen=True)
class FiniteSpace:
    points: tuple
    atoms: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "atoms", tuple(tuple(a) for a in self.atoms))
        seen = set()
        for a in self.atoms:
            if not a:
                raise ValueError("atoms must be nonempty")
            for p in a:
                if not 0 <= p < len(self.points):
                    raise ValueError(f"point index {p} out of range")
                if p in seen:
                    raise ValueError(f"point {p} lies in two atoms")
                seen.add(p)
        if len(seen) != len(self.points):
            raise ValueError("atoms do not cover all points")
        if len(set(self.points)) != len(self.points):
            raise ValueError("point names must be distinct")

    @classmethod
    def discrete(cls, n: int, prefix: str = "t") -> FiniteSpace:
        """``n`` points, each its own atom (the power-set algebra)."""
        return cls(tuple(f"{prefix}{i}" for i in range(n)), tuple((i,) for i in range(n)))

    @classmethod
    def from_sizes(cls, sizes, prefix: str = "t") -> FiniteSpace:
        """Atoms with the given numbers of points, numbered consecutively."""
        atoms, k = [], 0
        for s in sizes:
            atoms.append(tuple(range(k, k + s)))
            k += s
        return cls(tuple(f"{prefix}{i}" for i in range(k)), tuple(atoms))

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.atoms)) - 1

    @property
    def full(self) -> MSet:
        return MSet(self, self.full_mask)

    @property
    def empty(self) -> MSet:
        return MSet(self, 0)

    @cached_property
    def atom_of(self) -> tuple:
        owner = [0] * len(self.points)
        for i, a in enumerate(self.atoms):
            for p in a:
                owner[p] = i
        return tuple(owner)

    def mset(self, atom_indices=()) -> MSet:
        mask = 0
        for i in atom_indices:
            if not 0 <= i < len(self.atoms):
                raise ValueError(f"atom index {i} out of range")
            mask |= 1 << i
        return MSet(self, mask)

    def atom(self, i: int) -> MSet:
        return MSet(self, 1 << i)

    def all_sets(self):
        for mask in range(self.full_mask + 1):
            yield MSet(self, mask)

    def point_index(self, name) -> int:
        return self.points.index(name)

    def cover(self, pts) -> MSet:
        """Smallest measurable set containing the point indices ``pts``."""
        mask = 0
        for p in pts:
            mask |= 1 << self.atom_of[p]
        return MSet(self, mask)

    def inner(self, pts) -> MSet:
        """Largest measurable set contained in the point indices ``pts``."""
        pts = set(pts)
        mask = 0
        for i, a in enumerate(self.atoms):
            if all(p in pts for p in a):
                mask |= 1 << i
        return MSet(self, mask)

    def atoms_partition(self, E: MSet | None = None) -> Partition:
        E = self.full if E is None else E
        return Partition(E, tuple(MSet(self, 1 << i) for i in bits(E.mask)))

    def to_json(self) -> dict:
        return {"points": list(self.points), "atoms": [list(a) for a in self.atoms]}

    @classmethod
    def from_json(cls, data: dict) -> FiniteSpace:
        return cls(tuple(data["points"]), tuple(tuple(a) for a in data["atoms"]))


@dataclass(frozen=True)
class MSet:
    """A measurable set: a union of atoms of ``space``, given by a bit mask."""

    space: FiniteSpace = field(compare=False, repr=False)
    mask: int

    @property
    def atoms(self) -> list:
        return bits(self.mask)

    def points(self) -> tuple:
        return tuple(sorted(p for i in bits(self.mask) for p in self.space.atoms[i]))

    def __len__(self):
        return bin(self.mask).count("1")

    def __iter__(self):
        return iter(bits(self.mask))

    def __bool__(self):
        return self.mask != 0

    def __or__(self, other):
        return MSet(self.space, self.mask | other.mask)

    def __and__(self, other):
        return MSet(self.space, self.mask & other.mask)

    def __sub__(self, other):
        return MSet(self.space, self.mask & ~other.mask)

    def __xor__(self, other):
        return MSet(self.space, self.mask ^ other.mask)

    def __le__(self, other):
        return self.mask & ~other.mask == 0

    def __lt__(self, other):
        return self <= other and self.mask != other.mask

    def isdisjoint(self, other) -> bool:
        return self.mask & other.mask == 0

    def subsets(self):
        """All measurable subsets, in increasing mask order."""
        return [MSet(self.space, s) for s in sorted(submasks(self.mask))]

    def key(self) -> str:
        return ",".join(str(i) for i in bits(self.mask))

    def __repr__(self):
        return "{" + self.key() + "}"


@dataclass(frozen=True)
class Partition:
    """A finite family of disjoint nonempty measurable sets covering ``of``.

    Blocks are kept sorted by their least atom, so equal partitions
    compare equal.
    """

    of: MSet
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(sorted(self.blocks, key=lambda b: (b.mask & -b.mask)))
        object.__setattr__(self, "blocks", blocks)
        acc = 0
        for b in blocks:
            if b.mask == 0:
                raise ValueError("partition blocks must be nonempty")
            if acc & b.mask:
                raise ValueError("partition blocks overlap")
            acc |= b.mask
        if acc != self.of.mask:
            raise ValueError("partition blocks do not cover the carrier")

    @classmethod
    def from_masks(cls, space: FiniteSpace, masks) -> Partition:
        masks = list(masks)
        of = 0
        for m in masks:
            of |= m
        return cls(MSet(space, of), tuple(MSet(space, m) for m in masks))

    @property
    def masks(self) -> tuple:
        return tuple(b.mask for b in self.blocks)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)


@dataclass(frozen=True)
class TaggedPartition:
    partition: Partition
    tags: tuple

    def __post_init__(self):
        space = self.partition.of.space
        if len(self.tags) != len(self.partition.blocks):
            raise ValueError("one tag per block required")
        for b, t in zip(self.partition.blocks, self.tags):
            if not (b.mask >> space.atom_of[t]) & 1:
                raise ValueError(f"tag {t} is not in block {b}")


def _check_carrier(P: Partition, Q: Partition):
    if P.of.mask != Q.of.mask:
        raise CarrierMismatch(f"partitions of {P.of} and {Q.of}")


def is_refinement(P: Partition, Q: Partition) -> bool:
    """True iff Q is finer than P (every block of Q lies in a block of P)."""
    _check_carrier(P, Q)
    return all(any(q.mask & ~p.mask == 0 for p in P.blocks) for q in Q.blocks)


def common_refinement(P: Partition, Q: Partition) -> Partition:
    _check_carrier(P, Q)
    space = P.of.space
    blocks = [p.mask & q.mask for p in P.blocks for q in Q.blocks]
    return Partition(P.of, tuple(MSet(space, b) for b in blocks if b))


def _partitions_of(items):
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for part in _partitions_of(rest):
        for i in range(len(part)):
            yield part[:i] + (part[i] | first,) + part[i + 1:]
        yield (first,) + part


def partition_masks(mask: int, max_atoms: int = DEFAULT_MAX_ATOMS):
    """Every set partition of the atoms of ``mask``, as tuples of masks."""
    atoms = bits(mask)
    if len(atoms) > max_atoms:
        raise TooLarge(f"{len(atoms)} atoms exceed the enumeration guard {max_atoms}")
    return _partitions_of(tuple(1 << i for i in atoms))


def enumerate_partitions(E: MSet, max_atoms: int = DEFAULT_MAX_ATOMS):
    """Yield each partition of E into measurable blocks exactly once."""
    space = E.space
    for masks in partition_masks(E.mask, max_atoms):
        yield Partition(E, tuple(MSet(space, m) for m in masks))


def bell(n: int) -> int:
    """Bell numbers via the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def enumerate_tag_choices(P: Partition, max_choices: int = DEFAULT_MAX_TAG_CHOICES):
    """Yield every choice of one point per block."""
    pools = [b.points() for b in P.blocks]
    count = math.prod(len(p) for p in pools)
    if count > max_choices:
        raise TooLarge(f"{count} tag choices exceed the guard {max_choices}")
    for tags in itertools.product(*pools):
        yield TaggedPartition(P, tags)
