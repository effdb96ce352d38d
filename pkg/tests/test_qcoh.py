import pytest
from hypothesis import given
from hypothesis import strategies as st

from nccech.cech import ext
from nccech.coeff import Window
from nccech.examples import (depth4_line_bundle, depth4_spec, line_bundle, p1, quantum_spec,
                             structure_module)
from nccech.qcoh import (LocallyFreeModule, ModuleError, adjunction_check, direct_sum, graded_hom,
                         transport, twist, validate_module)

W = Window.interval(-6, 6)


@given(st.integers(-4, 4))
def test_line_bundles_are_valid(n):
    assert validate_module(line_bundle(p1(), n), W).valid


def test_missing_or_misshaped_gluing_is_rejected():
    S = p1()
    with pytest.raises(ModuleError, match="missing gluing"):
        LocallyFreeModule("M", S, 1, {i: [0] for i in "012"}, {("0", "1"): [[1]]})
    with pytest.raises(ModuleError, match="1x1"):
        LocallyFreeModule("M", S, 1, {i: [0] for i in "012"}, {("0", "1"): [[1]], ("0", "2"): [[1, 0]]})
    with pytest.raises(ModuleError, match="shifts"):
        LocallyFreeModule("M", S, 1, {"0": [0]}, {("0", "1"): [[1]], ("0", "2"): [[1]]})


def test_inhomogeneous_entry_is_reported():
    S = p1()
    M = LocallyFreeModule("M", S, 1, {i: [0] for i in "012"}, {("0", "1"): [[1]], ("0", "2"): [["x"]]})
    rep = validate_module(M, W)
    assert rep.homogeneity_failures and rep.homogeneity_failures[0]["gluing"] == ["0", "2"]


def test_singular_gluing_is_reported():
    S = p1()
    M = LocallyFreeModule("M", S, 2, {i: [0, 0] for i in "012"},
                          {("0", "1"): [[1, 0], [0, 1]], ("0", "2"): [[1, 0], [0, 0]]})
    rep = validate_module(M, W)
    assert [f["gluing"] for f in rep.invertibility_failures] == [["0", "2"]]


def test_cocycle_failure_is_reported():
    S = depth4_spec().instantiate(1)
    good = depth4_line_bundle(S, 1)
    assert validate_module(good, W).valid
    gl = {k: [[S.algebras[k[0]].format(v[0][0])]] for k, v in good.gluings.items()}
    gl[("1", "3")] = [["2"]]
    bad = LocallyFreeModule("bad", S, 1, good.shifts, gl)
    rep = validate_module(bad, W)
    assert {tuple(f["chain"]) for f in rep.cocycle_failures} == {("0", "1", "3"), ("1", "2", "3")}


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_global_hom_between_line_bundles(a, b):
    # Hom(O(a), O(b)) = H^0(O(b - a)): spanned by x^k, 0 <= k <= b - a
    S = p1()
    H = graded_hom(line_bundle(S, a), line_bundle(S, b), W)
    assert H.total_dim == max(b - a + 1, 0)
    assert H.total_dim == ext(line_bundle(S, a), line_bundle(S, b), W, pmax=0).dim(0)


def test_direct_sum_and_twist_shift_weights():
    S = p1()
    M = direct_sum([line_bundle(S, 0), twist(line_bundle(S, 1), (2,))])
    assert M.rank == 2 and validate_module(M, W).valid
    # basis vectors have degree -shift: twisting by 2 moves every global section down by two
    plain = graded_hom(structure_module(S), line_bundle(S, 1), W).dims()
    moved = graded_hom(structure_module(S), twist(line_bundle(S, 1), (2,)), W).dims()
    assert {(w[0] - 2,): d for w, d in plain.items() if d} == {w: d for w, d in moved.items() if d}


@given(st.integers(-2, 2), st.integers(-2, 2))
def test_pushforward_adjunction(a, b):
    S = p1()
    assert adjunction_check(line_bundle(S, a), line_bundle(S, b), Window.interval(-3, 3)) == []


def test_transport_to_a_deformed_level():
    Q2 = quantum_spec().instantiate(2)
    Q1 = quantum_spec().instantiate(1)
    O1 = structure_module(Q1)
    T = transport(O1, Q2)
    assert T.ring.order == 2 and validate_module(T, Window.parse("-1:1,0:1")).valid
