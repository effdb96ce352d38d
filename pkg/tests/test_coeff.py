from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nccech.coeff import (ArtinRing, Field, ModP, NotNilpotentError, SmallExtension, Window,
                          canonical_lift, flat_rank_pattern, format_weight, parse_weight,
                          reduce_scalar)

PRIMES = [2, 3, 5, 7, 101]
small = st.integers(-50, 50)
fracs = st.fractions(max_denominator=20)


@given(st.sampled_from(PRIMES), small, small, small)
def test_modp_field_axioms(p, a, b, c):
    x, y, z = ModP(a, p), ModP(b, p), ModP(c, p)
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x - x == 0
    if x != 0:
        assert x * (ModP(1, p) / x) == 1


@given(st.sampled_from(PRIMES), fracs)
def test_modp_agrees_with_rational_reduction(p, q):
    # a/b mod p == a * b^-1 mod p, whenever b is a unit
    if q.denominator % p == 0:
        return
    F = Field.prime(p)
    assert F(q) == ModP(q.numerator, p) * ModP(pow(q.denominator, -1, p), p)


def test_field_rejects_composite_characteristic():
    with pytest.raises(ValueError):
        Field.prime(6)


@given(fracs)
def test_rational_parse_format_roundtrip(q):
    F = Field.rationals()
    assert F.parse(F.format(F(q))) == q


def artin(order, field=Field.rationals()):
    return st.lists(fracs, min_size=order, max_size=order).map(lambda cs: ArtinRing(field, order).element(cs))


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(artin(n), artin(n), artin(n))))
def test_artin_ring_is_a_commutative_ring(xyz):
    x, y, z = xyz
    assert x * y == y * x
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z


@given(st.integers(1, 5))
def test_t_is_nilpotent_of_exact_order(n):
    R = ArtinRing(Field.rationals(), n)
    t = R.parse("t") if n > 1 else R.element([0])
    p = R.element([1])
    for _ in range(n - 1):
        p = p * t
    assert n == 1 or not p.is_zero()
    assert (p * t).is_zero()


@given(st.integers(1, 4).flatmap(lambda n: artin(n + 1)))
def test_small_extension_reduce_after_lift_is_identity(x):
    src = x.ring
    tgt = src.with_order(src.order - 1)
    SmallExtension(src, tgt)
    y = reduce_scalar(x, tgt)
    assert reduce_scalar(canonical_lift(y, src), tgt) == y
    assert y.coeffs == x.coeffs[: tgt.order]


def test_small_extension_must_raise_order_by_one():
    R = ArtinRing(Field.rationals(), 3)
    with pytest.raises(ValueError):
        SmallExtension(R, R.with_order(1))


def test_artin_parse():
    R = ArtinRing(Field.rationals(), 3)
    assert R.parse("1/2 - 3*t + t^2").coeffs == (Fraction(1, 2), -3, 1)
    assert R.parse("t^5").is_zero()


def jordan(blocks):
    """Nilpotent matrix with Jordan blocks of the given sizes (rows are images of basis vectors)."""
    n = sum(blocks)
    M = [[0] * n for _ in range(n)]
    k = 0
    for b in blocks:
        for j in range(b - 1):
            M[k + j + 1][k + j] = 1
        k += b
    return M


@given(st.integers(1, 4), st.lists(st.integers(1, 4), min_size=0, max_size=4))
def test_flat_rank_pattern_matches_jordan_type(order, blocks):
    blocks = [min(b, order) for b in blocks]
    free, rank = flat_rank_pattern(jordan(blocks), order)
    # a k[t]/t^n-module is free iff every Jordan block has size n
    assert free == all(b == order for b in blocks)
    if free:
        assert rank == len(blocks)


def test_flat_rank_pattern_detects_non_nilpotent():
    with pytest.raises(NotNilpotentError):
        flat_rank_pattern([[1]], 2)


def test_flat_rank_pattern_over_prime_field():
    assert flat_rank_pattern(jordan([2, 2]), 2, Field.prime(3)) == (True, 2)


@given(st.lists(st.tuples(small, st.integers(0, 5)), min_size=1, max_size=3))
def test_window_parse_and_membership(ranges):
    ranges = [(lo, lo + d) for lo, d in ranges]
    W = Window.parse(",".join("%d:%d" % r for r in ranges))
    assert W.rank == len(ranges)
    ws = W.weights()
    total = 1
    for lo, hi in ranges:
        total *= hi - lo + 1
    assert len(ws) == total == len(set(ws))
    assert all(w in W for w in ws)
    assert Window.parse(str(W)) == W


@given(small, st.integers(0, 5), st.integers(-3, 3), st.integers(0, 4))
def test_window_extend_contains_translates(lo, d, step, times):
    W = Window.interval(lo, lo + d)
    X = W.extend((step,), times)
    for (w,) in W.weights():
        for j in range(times + 1):
            assert (w + j * step,) in X


def test_window_rejects_empty_and_malformed():
    with pytest.raises(ValueError):
        Window.parse("3:1")
    with pytest.raises(ValueError):
        Window.parse("3")


@given(st.lists(small, min_size=1, max_size=3))
def test_weight_roundtrip(w):
    assert parse_weight(format_weight(tuple(w))) == tuple(w)
