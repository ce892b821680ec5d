"""Field kernel tests: axioms, oracle agreement, inverses, sampling."""

import math
import random

import pytest

from mmtsim.errors import FieldMismatchError, InvalidParameterError
from mmtsim.gf import DEFAULT_POLYS, Field, is_irreducible

from oracles import inv_exhaustive, mul_shift_reduce

GF16 = Field(4)
GF256 = Field(8)
GF2 = Field(1)


# ---------------------------------------------------------------------------
# construction / spec validation
# ---------------------------------------------------------------------------

def test_default_polys_all_construct():
    for u in range(1, 17):
        f = Field(u)
        assert f.q == 1 << u
        assert f.reduction_poly == DEFAULT_POLYS[u]


def test_reducible_poly_rejected():
    # x^4 + 1 = (x+1)^4 over GF(2)
    with pytest.raises(InvalidParameterError):
        Field(4, reduction_poly=0b10001)


def test_wrong_degree_rejected():
    with pytest.raises(InvalidParameterError):
        Field(4, reduction_poly=0b1011)  # degree 3


def test_u_out_of_range():
    for u in (0, 17, -1):
        with pytest.raises(InvalidParameterError):
            Field(u)


def test_is_irreducible_matches_known_counts():
    # 3 irreducible polynomials of degree 4 over GF(2)
    degree4 = [p for p in range(1 << 4, 1 << 5) if is_irreducible(p, 4)]
    assert len(degree4) == 3
    assert 0x13 in degree4


def test_config_round_trip():
    f = Field(8)
    assert Field.from_config(f.to_config()) == f


# ---------------------------------------------------------------------------
# addition
# ---------------------------------------------------------------------------

def test_add_self_inverse_and_identity():
    for a in GF16.elements():
        assert GF16.add(a, a) == 0
        assert GF16.add(a, 0) == a


def test_gf2_one_plus_one():
    assert GF2.add(1, 1) == 0


def test_add_equals_sub():
    rng = random.Random(7)
    for _ in range(100):
        a, b = rng.randrange(256), rng.randrange(256)
        assert GF256.add(a, b) == GF256.sub(a, b)


# ---------------------------------------------------------------------------
# multiplication
# ---------------------------------------------------------------------------

def test_mul_identities():
    for a in GF16.elements():
        assert GF16.mul(a, 1) == a
        assert GF16.mul(a, 0) == 0


def test_mul_known_value():
    # frozen from the shift-and-reduce oracle: 0x02 * 0x80 under 0x11B
    assert mul_shift_reduce(0x02, 0x80, 0x11B, 8) == 0x1B
    assert GF256.mul(0x02, 0x80) == 0x1B


def test_fast_path_matches_oracle_10k_pairs():
    rng = random.Random(1234)
    for _ in range(10_000):
        a, b = rng.randrange(256), rng.randrange(256)
        assert GF256.mul(a, b) == mul_shift_reduce(a, b, 0x11B, 8)


def test_clmul_path_matches_oracle():
    f = Field(12)
    rng = random.Random(99)
    for _ in range(500):
        a, b = rng.randrange(f.q), rng.randrange(f.q)
        assert f.mul(a, b) == mul_shift_reduce(a, b, f.reduction_poly, 12)


def test_field_axioms_exhaustive_gf16():
    els = list(GF16.elements())
    for a in els:
        for b in els:
            assert GF16.mul(a, b) == GF16.mul(b, a)
            assert GF16.add(a, b) == GF16.add(b, a)
    for a in els:
        for b in els:
            for c in els:
                assert GF16.mul(GF16.mul(a, b), c) == GF16.mul(a, GF16.mul(b, c))
                assert (GF16.mul(a, GF16.add(b, c))
                        == GF16.add(GF16.mul(a, b), GF16.mul(a, c)))


# ---------------------------------------------------------------------------
# inverses
# ---------------------------------------------------------------------------

def test_inv_exhaustive_gf16():
    for a in range(1, 16):
        inv = GF16.inv(a)
        assert inv == inv_exhaustive(a, GF16.reduction_poly, 4)
        assert GF16.mul(a, inv) == 1
        assert GF16.inv(inv) == a


def test_inv_one():
    assert GF256.inv(1) == 1


def test_inv_zero_raises():
    with pytest.raises(ZeroDivisionError):
        GF256.inv(0)


def test_inv_large_field():
    f = Field(12)
    rng = random.Random(5)
    for _ in range(50):
        a = rng.randrange(1, f.q)
        assert f.mul(a, f.inv(a)) == 1


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def test_sample_gf2_nonzero_always_one():
    rng = random.Random(0)
    assert all(GF2.sample(rng, nonzero=True) == 1 for _ in range(20))


def test_sample_deterministic():
    a = [GF256.sample(random.Random(42)) for _ in range(10)]
    b = [GF256.sample(random.Random(42)) for _ in range(10)]
    assert a == b


def test_sample_uniformity_5_sigma():
    # 1e5 nonzero draws in GF(16): each count within 5 sigma of N/15
    rng = random.Random(2024)
    n_draws = 100_000
    counts = [0] * 16
    for _ in range(n_draws):
        counts[GF16.sample(rng, nonzero=True)] += 1
    assert counts[0] == 0
    p = 1 / 15
    sigma = math.sqrt(n_draws * p * (1 - p))
    for value in range(1, 16):
        assert abs(counts[value] - n_draws * p) <= 5 * sigma


def test_sample_with_zero_covers_zero():
    rng = random.Random(3)
    draws = {GF16.sample(rng) for _ in range(2000)}
    assert draws == set(range(16))


# ---------------------------------------------------------------------------
# element wrapper
# ---------------------------------------------------------------------------

def test_element_ops():
    a = GF256.element(0x57)
    b = GF256.element(0x83)
    assert (a + b).value == 0x57 ^ 0x83
    assert (a * b).value == GF256.mul(0x57, 0x83)
    assert (a.inverse() * a).value == 1


def test_element_mismatched_specs():
    a = GF256.element(3)
    b = GF16.element(3)
    with pytest.raises(FieldMismatchError):
        _ = a + b
    with pytest.raises(FieldMismatchError):
        _ = a * b
    # same parameters, same spec, even across instances
    c = Field(8).element(5)
    assert (a * c).value == GF256.mul(3, 5)


def test_element_out_of_range():
    with pytest.raises(InvalidParameterError):
        GF16.element(16)


# ---------------------------------------------------------------------------
# vector helpers
# ---------------------------------------------------------------------------

def test_vector_ops_match_scalar():
    import numpy as np
    rng = random.Random(8)
    v = np.array([rng.randrange(256) for _ in range(64)], dtype=GF256.dtype)
    for c in (0, 1, 7, 0xFE):
        out = GF256.mul_vec(c, v)
        assert [int(x) for x in out] == [GF256.mul(c, int(x)) for x in v]
        acc = v.copy()
        GF256.addmul_vec(acc, c, v)
        assert [int(x) for x in acc] == [v0 ^ GF256.mul(c, int(v0)) for v0 in map(int, v)]
