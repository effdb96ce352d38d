"""Built-in example schemes and modules used by the tests, scripts and workspaces.

* ``p1_spec``: the projective line on the poset ``0 < 1, 0 < 2`` (``1 ∩ 2 = 0``),
  charts ``k[x]``, ``k[y]``, ``k[x, x^-1]`` with ``y -> x^-1``.
* ``quantum_spec``: the projective line times the affine line, deformed by the
  Ore relation ``s x = x s + t x`` (bigraded: ``x:(1,0)``, ``s:(0,1)``, ``t:(0,1)``).
* ``depth4_spec``: the chain ``0 < 1 < 2 < 3`` plus ``0 < 4``; it has chains
  ``i < j < k < l``, so obstruction cocycles and their closedness are non-vacuous.
* ``p1xp1_spec``: the product of two projective lines on the nine-element toric
  poset ``{+, -, 0}^2`` (componentwise, ``0`` below ``+`` and ``-``).
"""

from __future__ import annotations

from itertools import product

from .coeff import Field
from .qcoh import LocallyFreeModule, direct_sum, structure_module, twist
from .scheme import ChartSpec, MeetPoset, NcScheme, SchemeSpec

LAURENT_RULES = ["x*z -> 1", "z*x -> 1"]


def p1_poset() -> MeetPoset:
    return MeetPoset(["0", "1", "2"], [("0", "1"), ("0", "2")], {("1", "2"): "0"})


def p1_spec(field: Field | None = None, length_cap: int = 16, t_weight=(0,)) -> SchemeSpec:
    charts = {
        "0": ChartSpec("A0", [("x", 1), ("z", -1)], LAURENT_RULES),
        "1": ChartSpec("A1", [("x", 1)], []),
        "2": ChartSpec("A2", [("y", -1)], []),
    }
    gluings = {("0", "1"): {"x": "x"}, ("0", "2"): {"y": "z"}}
    return SchemeSpec("P1", p1_poset(), charts, gluings, field or Field(), tuple(t_weight), length_cap)


def p1(order: int = 1, field: Field | None = None) -> NcScheme:
    return p1_spec(field).instantiate(order)


def line_bundle(S: NcScheme, n: int, name: str | None = None) -> LocallyFreeModule:
    """``O(n)`` on a P¹-type scheme (charts ``0, 1, 2``, coordinate ``x`` on chart 0)."""
    zero = (0,) * S.rank
    minus = (-n,) + (0,) * (S.rank - 1)
    A0 = S.algebras["0"]
    if n >= 0:
        g = A0.parse("x^%d" % n) if n else A0.one()
    else:
        g = A0.parse("z^%d" % -n)
    return LocallyFreeModule(name or "O(%d)" % n, S, 1,
                             {"0": [zero], "1": [zero], "2": [minus]},
                             {("0", "1"): [[A0.one()]], ("0", "2"): [[g]]})


def sum_of_line_bundles(S: NcScheme, degrees, name: str | None = None) -> LocallyFreeModule:
    mods = [line_bundle(S, n) for n in degrees]
    return mods[0] if len(mods) == 1 else direct_sum(mods, name)


def quantum_spec(field: Field | None = None, length_cap: int = 16) -> SchemeSpec:
    charts = {
        "0": ChartSpec("Q0", [("x", (1, 0)), ("z", (-1, 0)), ("s", (0, 1))],
                       LAURENT_RULES + ["s*x -> x*s + t*x", "s*z -> z*s - t*z"]),
        "1": ChartSpec("Q1", [("x", (1, 0)), ("s", (0, 1))], ["s*x -> x*s + t*x"]),
        "2": ChartSpec("Q2", [("y", (-1, 0)), ("s", (0, 1))], ["s*y -> y*s - t*y"]),
    }
    gluings = {("0", "1"): {"x": "x", "s": "s"}, ("0", "2"): {"y": "z", "s": "s"}}
    return SchemeSpec("quantum", p1_poset(), charts, gluings, field or Field(), (0, 1), length_cap)


def depth4_spec(field: Field | None = None, length_cap: int = 16) -> SchemeSpec:
    P = MeetPoset(["0", "1", "2", "3", "4"], [("0", "1"), ("1", "2"), ("2", "3"), ("0", "4")],
                  {("1", "4"): "0", ("2", "4"): "0", ("3", "4"): "0"})
    laurent = [("x", 1), ("z", -1)]
    charts = {
        "0": ChartSpec("D0", laurent, LAURENT_RULES),
        "1": ChartSpec("D1", laurent, LAURENT_RULES),
        "2": ChartSpec("D2", laurent, LAURENT_RULES),
        "3": ChartSpec("D3", [("x", 1)], []),
        "4": ChartSpec("D4", [("y", -1)], []),
    }
    gluings = {}
    for (i, j) in P.relations():
        if j == "4":
            gluings[(i, j)] = {"y": "z"}
        elif j == "3":
            gluings[(i, j)] = {"x": "x"}
        else:
            gluings[(i, j)] = {"x": "x", "z": "z"}
    return SchemeSpec("depth4", P, charts, gluings, field or Field(), (0,), length_cap)


def depth4_line_bundle(S: NcScheme, n: int) -> LocallyFreeModule:
    """``O(n)`` on the depth-4 model of P¹ (chart 4 is the chart at infinity)."""
    zero = (0,)
    shifts = {i: [zero] for i in S.poset.elements}
    shifts["4"] = [(-n,)]
    gl = {}
    for (i, j) in S.poset.relations():
        A = S.algebras[i]
        if j == "4":
            gl[(i, j)] = [[A.parse("x^%d" % n) if n > 0 else (A.parse("z^%d" % -n) if n < 0 else A.one())]]
        else:
            gl[(i, j)] = [[A.one()]]
    return LocallyFreeModule("O(%d)" % n, S, 1, shifts, gl)


# ---------------------------------------------------------------------------
# P¹ × P¹ on the toric poset


SIGNS = ("0", "+", "-")
_LETTERS = (("x", "X"), ("y", "Y"))


def p1xp1_poset() -> MeetPoset:
    els = ["".join(c) for c in product(SIGNS, repeat=2)]

    def below(c, d):
        return c != d and all(a == b or a == "0" for a, b in zip(c, d))

    less = [(c, d) for c in els for d in els if below(c, d)]
    meets = {}
    for c in els:
        for d in els:
            if c < d:
                meets[(c, d)] = "".join(a if a == b else "0" for a, b in zip(c, d))
    return MeetPoset(els, less, meets)


def _chart_letters(c):
    out = []
    for g, sign in enumerate(c):
        lo, up = _LETTERS[g]
        e = tuple(1 if k == g else 0 for k in range(2))
        neg = tuple(-v for v in e)
        if sign in "0+":
            out.append((lo, e))
        if sign in "0-":
            out.append((up, neg))
    return out


def p1xp1_spec(field: Field | None = None, length_cap: int = 16) -> SchemeSpec:
    P = p1xp1_poset()
    charts = {}
    for c in P.elements:
        letters = _chart_letters(c)
        names = [n for n, _ in letters]
        rules = []
        for a, b in (("x", "X"), ("y", "Y")):
            if a in names and b in names:
                rules += ["%s*%s -> 1" % (a, b), "%s*%s -> 1" % (b, a)]
        for second in ("y", "Y"):
            for first in ("x", "X"):
                if first in names and second in names:
                    rules.append("%s*%s -> %s*%s" % (second, first, first, second))
        charts[c] = ChartSpec("T" + c, letters, rules)
    gluings = {}
    for (i, j) in P.relations():
        gluings[(i, j)] = {n: n for n, _ in _chart_letters(j)}
    return SchemeSpec("P1xP1", P, charts, gluings, field or Field(), (0, 0), length_cap)


def p1xp1_line_bundle(S: NcScheme, a: int, b: int, name: str | None = None) -> LocallyFreeModule:
    """``O(a, b)``: the transition from a chart with a ``-`` in slot g multiplies by ``x_g^{a_g}``."""
    deg = (a, b)
    shifts = {}
    for c in S.poset.elements:
        shifts[c] = [tuple(-deg[g] if c[g] == "-" else 0 for g in range(2))]
    gl = {}
    for (c, d) in S.poset.relations():
        A = S.algebras[c]
        factors = []
        for g in range(2):
            if d[g] == "-" and c[g] == "0" and deg[g]:
                lo, up = _LETTERS[g]
                factors.append("%s^%d" % (lo if deg[g] > 0 else up, abs(deg[g])))
        gl[(c, d)] = [[A.parse("*".join(factors)) if factors else A.one()]]
    return LocallyFreeModule(name or "O(%d,%d)" % (a, b), S, 1, shifts, gl)


__all__ = [
    "p1_poset", "p1_spec", "p1", "line_bundle", "sum_of_line_bundles", "quantum_spec",
    "depth4_spec", "depth4_line_bundle", "p1xp1_poset", "p1xp1_spec", "p1xp1_line_bundle",
    "structure_module", "direct_sum", "twist",
]
