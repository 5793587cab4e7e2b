import random

import pytest
from hypothesis import given, strategies as st

from gouldrn.errors import CarrierMismatch, TooLarge
from gouldrn.space import (
    FiniteSpace, MSet, Partition, bell, common_refinement, enumerate_partitions,
    enumerate_tag_choices, is_refinement,
)


def stirling_bell(n):
    """Bell numbers from the recurrence B(n+1) = sum C(n,k) B(k)."""
    from math import comb
    B = [1]
    for m in range(n):
        B.append(sum(comb(m, k) * B[k] for k in range(m + 1)))
    return B[n]


def random_partition(rng, sp, E):
    labels = {}
    for i in E:
        labels.setdefault(rng.randint(0, 2), []).append(i)
    return Partition.from_masks(sp, [sum(1 << i for i in b) for b in labels.values()])


def test_space_validation():
    with pytest.raises(ValueError):
        FiniteSpace(("a", "b"), ((0,), (0, 1)))
    with pytest.raises(ValueError):
        FiniteSpace(("a", "b"), ((0,),))
    sp = FiniteSpace.from_sizes([2, 1])
    assert sp.n_points == 3 and sp.n_atoms == 2
    assert FiniteSpace.from_json(sp.to_json()) == sp


def test_cover_and_inner():
    sp = FiniteSpace.from_sizes([2, 2, 1])
    assert sp.cover([0]).mask == 0b001
    assert sp.cover([1, 2]).mask == 0b011
    assert sp.inner([0]).mask == 0
    assert sp.inner([0, 1, 2]).mask == 0b001


def test_refinement_examples():
    sp = FiniteSpace.discrete(4)
    A, B, C, D = 1, 2, 4, 8
    P = Partition.from_masks(sp, [A | B, C])
    Q = Partition.from_masks(sp, [A, B | C])
    assert is_refinement(P, P)
    assert not is_refinement(P, Q)
    assert is_refinement(P, sp.atoms_partition(P.of))
    R1 = Partition.from_masks(sp, [A | B, C | D])
    R2 = Partition.from_masks(sp, [A | C, B | D])
    assert common_refinement(R1, R2).masks == (A, B, C, D)
    top = Partition.from_masks(sp, [A | B | C | D])
    assert common_refinement(top, R1) == R1
    assert common_refinement(R1, R1) == R1


def test_carrier_mismatch():
    sp = FiniteSpace.discrete(3)
    with pytest.raises(CarrierMismatch):
        is_refinement(Partition.from_masks(sp, [1, 2]), Partition.from_masks(sp, [1, 2, 4]))


@given(st.integers(0, 10**6))
def test_refinement_lattice(seed):
    rng = random.Random(seed)
    sp = FiniteSpace.discrete(rng.randint(1, 5))
    E = list(range(sp.n_atoms))
    P, Q = random_partition(rng, sp, E), random_partition(rng, sp, E)
    J = common_refinement(P, Q)
    assert is_refinement(P, J) and is_refinement(Q, J)
    for R in enumerate_partitions(sp.full):
        assert is_refinement(R, sp.atoms_partition())
        if is_refinement(P, R) and is_refinement(Q, R):
            assert is_refinement(J, R)
        if is_refinement(P, R) and is_refinement(R, P):
            assert R == P


@pytest.mark.parametrize("n", range(0, 8))
def test_partition_counts(n):
    sp = FiniteSpace.discrete(max(n, 1))
    E = MSet(sp, (1 << n) - 1)
    parts = list(enumerate_partitions(E))
    assert len(parts) == bell(n) == stirling_bell(n)
    assert len(set(parts)) == len(parts)


def test_bell_six():
    sp = FiniteSpace.discrete(6)
    assert sum(1 for _ in enumerate_partitions(sp.full)) == 203


def test_enumeration_guard():
    sp = FiniteSpace.discrete(4)
    with pytest.raises(TooLarge):
        list(enumerate_partitions(sp.full, max_atoms=3))


def test_tag_choices():
    sp = FiniteSpace.from_sizes([3, 2, 1])
    P = sp.atoms_partition()
    assert sum(1 for _ in enumerate_tag_choices(P)) == 6
    sp2 = FiniteSpace.from_sizes([2, 2])
    assert sum(1 for _ in enumerate_tag_choices(sp2.atoms_partition())) == 4
    sp3 = FiniteSpace.discrete(3)
    assert sum(1 for _ in enumerate_tag_choices(sp3.atoms_partition())) == 1
    with pytest.raises(TooLarge):
        list(enumerate_tag_choices(P, max_choices=5))


def test_mset_ops():
    sp = FiniteSpace.discrete(4)
    a, b = MSet(sp, 0b0011), MSet(sp, 0b0110)
    assert (a | b).mask == 0b0111
    assert (a & b).mask == 0b0010
    assert (a - b).mask == 0b0001
    assert a.key() == "0,1"
    assert repr(a) == "{0,1}"
