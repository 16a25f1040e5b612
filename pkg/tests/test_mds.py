from collections import Counter
from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from secbroadcast.errors import DomainError, UnsupportedFieldError
from secbroadcast.field import PRIMITIVE_POLYS, get_field
from secbroadcast.mds import check_mds, derive_key, expand_key, rs_generator, rs_parity_check
from tests.test_field import clmul_mod

# K'_1 = K_1, K'_2 = K_2, K'_3 = K_1 + K_2
THREE_TWO = np.array([[1, 0, 1], [0, 1, 1]], dtype=np.int64)


def _ops(q):
    """Scalar mul/inv that do not touch the package's tables."""
    if q & (q - 1) == 0:
        k = q.bit_length() - 1
        mul = lambda a, b: clmul_mod(a, b, k, PRIMITIVE_POLYS[k])  # noqa: E731

        def inv(a):
            r = 1
            for _ in range(q - 2):
                r = mul(r, a)
            return r
        return mul, inv, lambda a, b: a ^ b
    return (lambda a, b: a * b % q), (lambda a: pow(a, q - 2, q)), (lambda a, b: (a - b) % q)


def oracle_rank(rows, q):
    mul, inv, sub = _ops(q)
    m = [list(map(int, r)) for r in rows]
    rank, col = 0, 0
    ncols = len(m[0]) if m else 0
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        iv = inv(m[rank][col])
        m[rank] = [mul(v, iv) for v in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col]:
                c = m[i][col]
                m[i] = [sub(a, mul(c, b)) for a, b in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


def test_parity_check_4_2_over_256_all_row_pairs():
    g = rs_parity_check(4, 2, 256).to_array()
    assert g.shape == (4, 2)
    for rows in combinations(range(4), 2):
        assert oracle_rank(g[list(rows)], 256) == 2


def test_parity_check_8_3_over_16_all_subsets():
    g = rs_parity_check(8, 3, 16)
    assert check_mds(g, "rows", 3)
    arr = g.to_array()
    assert all(oracle_rank(arr[list(r)], 16) == 3 for r in combinations(range(8), 3))


def test_generator_3_2_over_4_column_pairs():
    g = rs_generator(3, 2, 4).to_array()
    assert g.shape == (2, 3)
    for cols in combinations(range(3), 2):
        assert oracle_rank(g[:, list(cols)].T, 4) == 2


def test_three_two_sketch_is_mds_over_gf2():
    assert check_mds(THREE_TWO, "cols", 2, q=2)
    key = np.array([[1, 0]])
    assert expand_key(key, THREE_TWO, get_field(2)).tolist() == [[1, 0, 1]]


def test_full_size_is_identity_like():
    f = get_field(16)
    assert check_mds(np.eye(4, dtype=np.int64), "rows", 4, q=16)
    x = f.random(np.random.default_rng(1), (2, 4))
    assert np.array_equal(derive_key(x, np.eye(4, dtype=np.int64), f), x)
    assert np.array_equal(expand_key(x, np.eye(4, dtype=np.int64), f), x)


def test_zero_input_gives_zero_key():
    g = rs_parity_check(6, 2, 256)
    assert not derive_key(np.zeros((3, 6), dtype=np.int64), g).any()


def test_repeated_row_detected():
    m = np.array([[1, 2], [1, 2], [0, 1]])
    assert not check_mds(m, "rows", 2, q=16)


def test_length_beyond_field_refused():
    with pytest.raises(UnsupportedFieldError):
        rs_parity_check(5, 3, 2)
    with pytest.raises(UnsupportedFieldError):
        rs_generator(300, 2, 256)
    with pytest.raises(DomainError):
        rs_parity_check(3, 4, 16)


def test_derive_key_uniform_small_instance():
    # k1=2, kB=1, q=2: G is the all-ones column
    g = rs_parity_check(2, 1, 2)
    assert g.to_array().tolist() == [[1], [1]]
    keys = Counter()
    for a, b in product(range(2), repeat=2):
        keys[int(derive_key(np.array([[a, b]]), g)[0, 0])] += 1
    assert keys == {0: 2, 1: 2}


def test_key_independent_of_any_single_observed_row():
    g = rs_parity_check(3, 1, 4)
    for seen in range(3):
        joint = Counter()
        for x in product(range(4), repeat=3):
            k = int(derive_key(np.array([x]), g)[0, 0])
            joint[(x[seen], k)] += 1
        assert set(joint.values()) == {4} and len(joint) == 16


def test_expanded_pairs_uniform_over_gf2():
    f = get_field(2)
    for cols in combinations(range(3), 2):
        seen = Counter()
        for key in product(range(2), repeat=2):
            pad = expand_key(np.array([key]), THREE_TWO, f)
            seen[tuple(pad[0, list(cols)])] += 1
        assert seen == {v: 1 for v in product(range(2), repeat=2)}


@pytest.mark.parametrize("q", [16, 13, 256, 1 << 16])
def test_structured_apply_matches_dense(q):
    f = get_field(q)
    rng = np.random.default_rng(q)
    n = min(q, 40)
    for mat in (rs_parity_check(n, 7, q), rs_generator(n, 7, q)):
        x = f.random(rng, (3, mat.shape[0]))
        assert np.array_equal(mat.apply(x), f.matmul(x, mat.to_array()))


def test_matrices_deterministic():
    a = rs_parity_check(20, 5, 1 << 16).to_array()
    b = rs_parity_check(20, 5, 1 << 16).to_array()
    assert np.array_equal(a, b)
    # first column all ones, second the points themselves
    assert a[:, 0].tolist() == [1] * 20 and a[:, 1].tolist() == list(range(20))


def test_random_subset_mode_is_seeded():
    g = rs_parity_check(64, 20, 1 << 16)
    assert check_mds(g, "rows", 20) and check_mds(g, "rows", 20)


@settings(max_examples=40, deadline=None)
@given(k1=st.integers(1, 12), data=st.data(), q=st.sampled_from([16, 17, 256]))
def test_complement_of_small_observation_keeps_full_rank(k1, data, q):
    kB = data.draw(st.integers(0, k1))
    observed = data.draw(st.sets(st.integers(0, k1 - 1), max_size=k1 - kB))
    g = rs_parity_check(k1, kB, q).to_array()
    hidden = [r for r in range(k1) if r not in observed]
    assert oracle_rank(g[hidden], q) == kB if kB else True


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 16), data=st.data())
def test_generator_small_column_sets_independent(n, data):
    kB = data.draw(st.integers(1, n))
    cols = data.draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=kB))
    g = rs_generator(n, kB, 16).to_array()
    assert oracle_rank(g[:, sorted(cols)].T, 16) == len(cols)


def test_generator_wider_key_than_pad():
    g = rs_generator(3, 5, 16)
    assert g.shape == (5, 3)
    assert oracle_rank(g.to_array().T, 16) == 3
