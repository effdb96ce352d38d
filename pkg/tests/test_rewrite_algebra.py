"""Normal forms and products against closed formulas."""

from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nccech.algebra import (AlgebraHom, build_algebra, check_hom, compose_hom, homs_equal,
                            identity_matrix, invert_matrix, matrix_mul)
from nccech.coeff import ArtinRing, Field
from nccech.rewrite import RewriteError

QQ = Field.rationals()


def laurent(order=1):
    return build_algebra("L", [("x", 1), ("z", -1)], ["x*z -> 1", "z*x -> 1"], ArtinRing(QQ, order))


def weyl(order):
    """k<x, s>/(s x - x s - t x) over k[t]/t^order, bigraded."""
    return build_algebra("Q", [("x", (1, 0)), ("s", (0, 1))], ["s*x -> x*s + t*x"],
                         ArtinRing(QQ, order, (0, 1)))


def word(A, letters):
    return A.parse("*".join(letters)) if letters else A.one()


@given(st.lists(st.sampled_from("xz"), max_size=10))
def test_laurent_normal_form_is_net_power(letters):
    A = laurent()
    k = letters.count("x") - letters.count("z")
    expected = A.one() if k == 0 else A.parse(("x^%d" if k > 0 else "z^%d") % abs(k))
    assert A.nf(word(A, letters)) == expected


def weyl_oracle(A, a, b, c, d):
    """(x^a s^b)(x^c s^d) = x^(a+c) (s + c t)^b s^d, truncated at t^order."""
    n = A.ring.order
    out = {}
    for k in range(min(b, n - 1) + 1):
        coeff = comb(b, k) * c ** k
        if coeff == 0:
            continue
        term = A.parse("x^%d*s^%d" % (a + c, b - k + d)) if (a + c or b - k + d) else A.one()
        term = A.times_t(term, k)
        for key, v in term.items():
            out[key] = out.get(key, 0) + coeff * v
    return {k: v for k, v in out.items() if v}


@given(st.integers(1, 3), st.integers(0, 3), st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))
def test_quantum_chart_products_match_closed_formula(n, a, b, c, d):
    A = weyl(n)

    def mono(p, q):
        parts = ([] if not p else ["x^%d" % p]) + ([] if not q else ["s^%d" % q])
        return A.parse("*".join(parts)) if parts else A.one()

    assert A.mul(mono(a, b), mono(c, d)) == weyl_oracle(A, a, b, c, d)


@given(st.integers(1, 3), st.integers(0, 4), st.integers(0, 4))
def test_pbw_basis_dimension(n, a, b):
    # t^j x^a s^(b-j), 0 <= j < n, j <= b
    A = weyl(n)
    assert len(A.graded_basis((a, b))) == min(n, b + 1)
    assert len(A.normal_words((a, b))) == 1


elements = st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(-2, 2)), max_size=3)


@given(elements, elements, elements)
def test_multiplication_is_associative(xs, ys, zs):
    A = weyl(3)

    def el(terms):
        out = {}
        for p, q, c in terms:
            parts = ([] if not p else ["x^%d" % p]) + ([] if not q else ["s^%d" % q])
            m = A.parse("*".join(parts)) if parts else A.one()
            for k, v in m.items():
                out[k] = out.get(k, 0) + c * v
        return {k: v for k, v in out.items() if v}

    x, y, z = el(xs), el(ys), el(zs)
    assert A.mul(A.mul(x, y), z) == A.mul(x, A.mul(y, z))


def test_confluent_system_has_no_unresolved_overlaps():
    A = laurent()
    rep = A.system.check_local_confluence()
    assert rep.confluent and rep.checked == 2


def test_non_confluent_overlap_is_reported():
    R = ArtinRing(QQ, 1)
    A = build_algebra("N", [("x", 1), ("y", 1), ("z", 1)], ["z*y -> x*x", "y*z -> x*x"], R)
    rep = A.system.check_local_confluence()
    assert not rep.confluent
    assert rep.unresolved[0].word == A.alphabet.char("z") + A.alphabet.char("y") + A.alphabet.char("z")


def test_inhomogeneous_rule_is_rejected():
    with pytest.raises((RewriteError, ValueError)):
        build_algebra("B", [("x", 1), ("y", 2)], ["x*x -> x"], ArtinRing(QQ, 1))


def test_hom_check_accepts_inclusion_and_rejects_scaled_derivation():
    Q0 = build_algebra("Q0", [("x", (1, 0)), ("z", (-1, 0)), ("s", (0, 1))],
                       ["x*z -> 1", "z*x -> 1", "s*x -> x*s + t*x", "s*z -> z*s - t*z"],
                       ArtinRing(QQ, 2, (0, 1)))
    Q1 = weyl(2)
    assert check_hom(AlgebraHom(Q1, Q0, {"x": "x", "s": "s"})).valid
    rep = check_hom(AlgebraHom(Q1, Q0, {"x": "x", "s": "2*s"}))
    assert rep.failed_rules and not rep.weight_errors
    assert check_hom(AlgebraHom(Q1, Q0, {"x": "x", "s": "x"})).weight_errors


def test_hom_composition_and_identity():
    A = laurent()
    inv = AlgebraHom(A, A, {"x": "z", "z": "x"})  # not weight preserving, but an algebra map
    assert not check_hom(inv).failed_rules
    assert homs_equal(compose_hom(inv, inv), AlgebraHom.identity(A))


def test_matrix_inverse_over_laurent_ring():
    A = laurent()
    M = [[A.parse("x^2"), A.parse("x")], [{}, A.one()]]
    U = invert_matrix(A, M, search_weights=[(k,) for k in range(-3, 1)])
    assert U is not None
    assert matrix_mul(A, M, U) == identity_matrix(A, 2) == matrix_mul(A, U, M)
    # x is not invertible in k[x]
    P = build_algebra("P", [("x", 1)], [], ArtinRing(QQ, 1))
    assert invert_matrix(P, [[P.parse("x")]], search_weights=[(k,) for k in range(-3, 4)]) is None
