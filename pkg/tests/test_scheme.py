from dataclasses import replace
from itertools import permutations
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nccech.coeff import Window
from nccech.examples import (depth4_spec, p1_poset, p1_spec, p1xp1_poset, quantum_spec)
from nccech.scheme import (ChartSpec, DeformationTower, MeetPoset, PosetError, enumerate_chains,
                           validate_scheme, validate_tower)

POSETS = {"p1": p1_poset(), "depth4": depth4_spec().poset, "toric": p1xp1_poset()}


def test_poset_axioms_are_enforced():
    with pytest.raises(PosetError, match="cycle"):
        MeetPoset(["a", "b"], [("a", "b"), ("b", "a")])
    with pytest.raises(PosetError, match="no meet"):
        MeetPoset(["a", "b", "c"], [("a", "b")])
    with pytest.raises(PosetError, match="lower bound"):
        MeetPoset(["0", "1", "2"], [("0", "1"), ("0", "2")], {("1", "2"): "1"})
    with pytest.raises(PosetError, match="greatest"):
        # both 0 and m lie below 1 and 2, but 0 is named the meet although m is bigger
        MeetPoset(["0", "m", "1", "2"], [("0", "m"), ("m", "1"), ("m", "2")], {("1", "2"): "0"})


@given(st.sampled_from(sorted(POSETS)), st.data())
def test_chain_enumeration_counts_and_meets(name, data):
    P = POSETS[name]
    d = len(P)
    p = data.draw(st.integers(0, d - 1))
    chains = enumerate_chains(P, p)
    assert len(chains) == comb(d, p + 1)
    for c in chains:
        assert list(c.indices) == sorted(set(c.indices))
        assert all(P.leq(c.meet, e) for e in c.elements)
        assert all(P.leq(l, c.meet) for l in P.elements if all(P.leq(l, e) for e in c.elements))


@given(st.permutations(list(p1_poset().elements)))
def test_chain_meets_do_not_depend_on_enumeration(enum):
    P = p1_poset()
    for p in range(3):
        meets = sorted((tuple(sorted(c.elements)), c.meet) for c in enumerate_chains(P, p, enum))
        base = sorted((tuple(sorted(c.elements)), c.meet) for c in enumerate_chains(P, p))
        assert meets == base


def test_bad_enumeration_rejected():
    with pytest.raises(PosetError):
        enumerate_chains(p1_poset(), 0, ["0", "1", "1"])


@pytest.mark.parametrize("spec,window", [
    (p1_spec(), Window.interval(-6, 6)),
    (depth4_spec(), Window.interval(-4, 4)),
    (quantum_spec(), Window.parse("-2:2,0:2")),
])
def test_example_schemes_validate(spec, window):
    rep = validate_scheme(spec.instantiate(1), window)
    assert rep.valid, rep.to_json()
    assert rep.checked_overlaps >= 2


def test_toric_scheme_validates():
    from nccech.examples import p1xp1_spec

    rep = validate_scheme(p1xp1_spec().instantiate(1), Window.parse("-1:1,-1:1"))
    assert rep.valid and rep.checked_chains == len(p1xp1_poset().order_chains(2))


def test_cocycle_failure_is_detected():
    spec = depth4_spec()
    gl = dict(spec.gluings)
    gl[("0", "3")] = {"x": "2*x"}
    rep = validate_scheme(replace(spec, gluings=gl).instantiate(1), Window.interval(-2, 2))
    assert not rep.valid
    assert any(f["chain"][0] == "0" and f["chain"][-1] == "3" for f in rep.cocycle_failures)


def test_surjectivity_failure_is_detected():
    # k[x^2] and k[x^-2] only generate the even part of k[x, x^-1]
    spec = p1_spec()
    charts = dict(spec.charts)
    charts["1"] = ChartSpec("E1", [("u", 2)], [])
    charts["2"] = ChartSpec("E2", [("v", -2)], [])
    gl = {("0", "1"): {"u": "x^2"}, ("0", "2"): {"v": "z^2"}}
    rep = validate_scheme(replace(spec, charts=charts, gluings=gl).instantiate(1), Window.interval(-3, 3))
    assert not rep.hom_failures and not rep.cocycle_failures
    assert sorted(f["weight"] for f in rep.surjectivity_failures) == ["-1", "-3", "1", "3"]


def test_non_homomorphic_gluing_is_detected():
    spec = quantum_spec()
    gl = dict(spec.gluings)
    gl[("0", "1")] = {"x": "x", "s": "2*s"}
    rep = validate_scheme(replace(spec, gluings=gl).instantiate(2), Window.parse("-1:1,0:1"))
    assert rep.hom_failures and rep.hom_failures[0]["gluing"] == ["0", "1"]


def test_non_confluent_chart_is_detected():
    spec = p1_spec()
    charts = dict(spec.charts)
    charts["1"] = ChartSpec("N", [("x", 1), ("y", 1), ("w", 1)], ["w*y -> x*x", "y*w -> x*x"])
    gl = dict(spec.gluings)
    gl[("0", "1")] = {"x": "x", "y": "x", "w": "x"}
    rep = validate_scheme(replace(spec, charts=charts, gluings=gl).instantiate(1), Window.interval(0, 1))
    assert rep.confluence_failures and rep.confluence_failures[0]["chart"] == "1"


def test_quantum_tower_is_flat_and_truncates():
    T = DeformationTower.from_spec(quantum_spec(), 3)
    rep = validate_tower(T, Window.parse("-2:2,0:2"))
    assert rep.valid, rep.to_json()
    # dim A^(n)_w = sum_j dim A^(1)_{w - j wt(t)}: a (1,2)-piece of chart 1 has dims 1, 2, 3
    assert [rep.dims[(n, "1")][(1, 2)] for n in (1, 2, 3)] == [1, 2, 3]


def test_inconsistent_tower_level_is_detected():
    T = DeformationTower.from_spec(quantum_spec(), 3,
                                   overrides={2: {"rules": {"1": {"s*x": "s*x -> x*s + 2*t*x"}}}})
    rep = validate_tower(T, Window.parse("-1:1,0:1"))
    assert not rep.valid


def test_tower_levels_must_match_orders():
    S = p1_spec()
    with pytest.raises(PosetError):
        DeformationTower("bad", [S.instantiate(2)])
