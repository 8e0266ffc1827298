import collections

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from oracles import all_partitions, stirling2
from liereach.closure import close_algebra
from liereach.models import xxz_2x2
from liereach.partitions import (
    Partition,
    count_partitions,
    enumerate_partitions,
    generators_from_partition,
    partitions_to_csv,
    sample_partition,
)
from liereach.pauli import SizeMismatchError


def test_counts():
    assert count_partitions(13, 1) == 1
    assert count_partitions(13, 13) == 1
    assert count_partitions(4, 2) == 7 == len(all_partitions(4, 2))


@pytest.mark.parametrize("n", range(1, 8))
def test_counts_match_formula(n):
    for m in range(1, n + 1):
        assert count_partitions(n, m) == stirling2(n, m)


def test_count_out_of_range():
    with pytest.raises(ValueError):
        count_partitions(3, 4)
    with pytest.raises(ValueError):
        sample_partition(3, 0)


@pytest.mark.parametrize("n", range(1, 7))
def test_enumeration_matches_brute_force(n):
    for m in range(1, n + 1):
        got = {p.blocks for p in enumerate_partitions(n, m)}
        assert got == all_partitions(n, m)


def test_trivial_samples():
    rng = np.random.default_rng(0)
    assert sample_partition(13, 1, rng) == Partition.single_block(13)
    assert sample_partition(13, 13, rng) == Partition.singletons(13)


def test_seeded_determinism():
    assert sample_partition(13, 5, 42) == sample_partition(13, 5, 42)


@given(st.integers(1, 13).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))), st.integers(0, 2**32))
def test_sample_invariants(nm, seed):
    n, m = nm
    p = sample_partition(n, m, seed)
    assert p.m == m
    items = sorted(i for b in p.blocks for i in b)
    assert items == list(range(n))
    assert [b[0] for b in p.blocks] == sorted(b[0] for b in p.blocks)


def test_uniform_four_two():
    rng = np.random.default_rng(1)
    c = collections.Counter(sample_partition(4, 2, rng).blocks for _ in range(70_000))
    assert len(c) == 7
    for v in c.values():
        assert abs(v / 70_000 - 1 / 7) <= 0.01


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_uniformity_chi_square(n):
    rng = np.random.default_rng(100 + n)
    for m in range(2, n):
        total = count_partitions(n, m)
        c = collections.Counter(sample_partition(n, m, rng).blocks for _ in range(100 * total))
        obs = [c[b] for b in all_partitions(n, m)]
        assert chisquare(obs).pvalue > 0.01


def test_canonical_form():
    p = Partition(4, ((3, 1), (2,), (0,)))
    assert p.blocks == ((0,), (1, 3), (2,))
    with pytest.raises(ValueError):
        Partition(3, ((0, 1), (1, 2)))
    with pytest.raises(ValueError):
        Partition(3, ((0,), (1,)))


def test_json_roundtrip():
    p = Partition(5, ((0, 3), (1, 2, 4)))
    assert Partition.from_json(p.to_json()) == p
    assert p.to_dict() == {"n_items": 5, "blocks": [[0, 3], [1, 2, 4]]}


def test_csv_export():
    text = partitions_to_csv([(7, Partition.singletons(2))])
    assert text.splitlines()[0] == "seed,m,partition_json"
    assert text.splitlines()[1].startswith("7,2,")


def test_generators_singletons_and_single_block():
    spec = xxz_2x2()
    gens = generators_from_partition(spec, Partition.singletons(13))
    assert gens == spec.operators()
    (whole,) = generators_from_partition(spec, Partition.single_block(13))
    assert whole == spec.total()


def test_single_block_rank_one():
    spec = xxz_2x2()
    gens = generators_from_partition(spec, Partition.single_block(13))
    assert close_algebra(gens).final_rank == 1


@given(st.integers(1, 13), st.integers(0, 2**32))
def test_generators_sum_to_hamiltonian(m, seed):
    spec = xxz_2x2(0.3, -1.7, 0.4)
    n = len(spec)
    m = min(m, n)
    gens = generators_from_partition(spec, sample_partition(n, m, seed))
    total = gens[0]
    for g in gens[1:]:
        total = total + g
    assert total.allclose(spec.total(), atol=1e-12)


def test_generator_size_mismatch():
    with pytest.raises(SizeMismatchError):
        generators_from_partition(xxz_2x2(), Partition.singletons(12))
