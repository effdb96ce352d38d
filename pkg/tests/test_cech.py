"""Čech complexes against the Laurent-monomial oracle and the Künneth formula."""

from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nccech.cech import (CechComplex, HomComplex, ModuleComplex, build_cech, euler_characteristic, ext,
                         resolution_exactness_check)
from nccech.coeff import Window
from nccech.examples import (depth4_line_bundle, depth4_spec, line_bundle, p1, p1xp1_line_bundle,
                             p1xp1_spec, structure_module, sum_of_line_bundles)
from nccech.qcoh import ModuleError, ModuleMap, twist

W6 = Window.interval(-6, 6)


def laurent_oracle(n, w):
    """(dim H^0, dim H^1) of O(n) at weight w: monomials x^w of k[x] ∩ x^n k[x^-1], and of the cokernel."""
    in_chart1 = w >= 0
    in_chart2 = w <= n
    h0 = int(in_chart1 and in_chart2)
    h1 = int(not in_chart1 and not in_chart2)
    return h0, h1


@given(st.integers(-4, 4))
def test_line_bundle_cohomology_matches_laurent_oracle(n):
    S = p1()
    rep = ext(structure_module(S), line_bundle(S, n), W6, pmax=2)
    for (w,) in W6.weights():
        assert (rep.dim(0, (w,)), rep.dim(1, (w,))) == laurent_oracle(n, w)
        assert rep.dim(2, (w,)) == 0
    assert rep.totals() == {0: max(n + 1, 0), 1: max(-n - 1, 0), 2: 0}


@given(st.integers(-3, 3))
def test_cech_resolution_is_exact_and_sign_mutation_breaks_it(n):
    C = CechComplex(line_bundle(p1(), n))
    rep = resolution_exactness_check(C, W6)
    assert rep.exact and rep.checked == 3 * 13 * 4  # charts x weights x (M_i, Č^0, Č^1, Č^2)
    broken = resolution_exactness_check(CechComplex(line_bundle(p1(), n), sign_mutation=(0, 0)), W6)
    assert not broken.exact


def test_depth4_cech_resolution_is_exact():
    S = depth4_spec().instantiate(1)
    for n in (-2, 0, 2):
        C = build_cech(depth4_line_bundle(S, n), window=Window.interval(-3, 3))
        assert C.dd_failures(Window.interval(-3, 3)) == []
        assert resolution_exactness_check(C, Window.interval(-3, 3)).exact


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_hom_complex_squares_to_zero(a, b):
    S = p1()
    H = HomComplex(sum_of_line_bundles(S, [0, a]), line_bundle(S, b))
    assert H.dd_failures(Window.interval(-4, 4)) == []


def test_sign_mutation_breaks_dd():
    S = depth4_spec().instantiate(1)
    H = HomComplex(depth4_line_bundle(S, 0), depth4_line_bundle(S, -2), sign_mutation=(1, 1))
    assert H.dd_failures(Window.interval(-2, 2))


@given(st.permutations(["0", "1", "2"]), st.integers(-3, 3))
def test_cohomology_table_is_enumeration_independent(enum, n):
    S = p1()
    base = ext(structure_module(S), line_bundle(S, n), W6).table()
    assert ext(structure_module(S), line_bundle(S, n), W6, enumeration=enum).table() == base


@given(st.permutations(list(depth4_spec().poset.elements)))
def test_depth4_ext_is_enumeration_independent(enum):
    S = depth4_spec().instantiate(1)
    F = depth4_line_bundle(S, 0)
    N = depth4_line_bundle(S, -3)
    W = Window.interval(-3, 3)
    assert ext(F, N, W, enumeration=enum).table() == ext(F, N, W).table()


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_euler_characteristic_of_terms_equals_that_of_cohomology(a, b):
    S = p1()
    F, N = line_bundle(S, a), line_bundle(S, b)
    rep = ext(F, N, W6)
    chi = euler_characteristic(F, N, W6)
    for w in W6.weights():
        assert chi[w] == sum((-1) ** p * rep.dim(p, w) for p in rep.degrees)


def p1_h(n, p, w):
    return laurent_oracle(n, w)[p]


@pytest.mark.parametrize("a,b", [(-2, 0), (1, -2), (-2, -2)])
def test_toric_cohomology_satisfies_kuenneth(a, b):
    S = p1xp1_spec().instantiate(1)
    W = Window.parse("-2:2,-2:2")
    rep = ext(structure_module(S), p1xp1_line_bundle(S, a, b), W, pmax=2)
    for w in W.weights():
        for p in range(3):
            expected = sum(p1_h(a, i, w[0]) * p1_h(b, p - i, w[1]) for i in range(2) if 0 <= p - i <= 1)
            assert rep.dim(p, w) == expected, (p, w)


def test_ext_of_complex_long_exact_sequence():
    # the section x of O(1) as a degree-0 map O{-1} -> O(1); its cone is the point x = 0,
    # so RHom(O, [O{-1} -> O(1)]) is one-dimensional, in degree 0 and weight 0
    S = p1()
    src = twist(structure_module(S), (-1,))
    tgt = line_bundle(S, 1)
    x = ModuleMap(src, tgt,
                  {"0": [[S.algebras["0"].parse("x")]], "1": [[S.algebras["1"].parse("x")]],
                   "2": [[S.algebras["2"].one()]]})
    assert not x.compatibility_failures() and not x.weight_failures()
    C = ModuleComplex("sky", {-1: src, 0: tgt}, {-1: x})
    assert C.composition_failures() == []
    rep = ext(structure_module(S), C, W6)
    assert rep.totals()[0] == 1 and rep.dim(0, (0,)) == 1
    assert sum(d for n, d in rep.totals().items() if n != 0) == 0


def test_hom_complex_rejects_mixed_schemes():
    with pytest.raises(ModuleError):
        HomComplex(structure_module(p1()), structure_module(p1()))
