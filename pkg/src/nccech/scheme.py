"""Finite meet-posets, NC schemes over them, and deformation towers.

Order convention: ``i < j`` means the open set ``U_i`` is contained in ``U_j``;
gluing maps go from the larger chart to the smaller one, ``phi_ij: A_j -> A_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import combinations

from .coeff import ArtinRing, Field, Window, wsub, wscale, format_weight
from .algebra import (AlgebraHom, GradedAlgebra, build_algebra, check_hom, compose_hom,
                      DEFAULT_LENGTH_CAP)
from . import linalg


class PosetError(ValueError):
    pass


class MeetPoset:
    """A finite poset in which every pair of elements has a greatest lower bound.

    ``less`` may be any generating set of strict relations; it is closed
    transitively.  ``meets`` must name the meet of every incomparable pair
    (comparable pairs are filled in).  All axioms are checked here.
    """

    def __init__(self, elements, less, meets=None):
        self.elements = tuple(elements)
        if len(set(self.elements)) != len(self.elements):
            raise PosetError("duplicate poset elements")
        pos = {e: k for k, e in enumerate(self.elements)}
        self._pos = pos
        lt = set()
        for a, b in less:
            for e in (a, b):
                if e not in pos:
                    raise PosetError("unknown poset element %r" % (e,))
            if a == b:
                raise PosetError("reflexive pair %r < %r" % (a, b))
            lt.add((a, b))
        changed = True
        while changed:
            changed = False
            for (a, b) in list(lt):
                for (c, d) in list(lt):
                    if b == c and (a, d) not in lt:
                        lt.add((a, d))
                        changed = True
        for (a, b) in lt:
            if (b, a) in lt or a == b:
                raise PosetError("order relation has a cycle through %r and %r" % (a, b))
        self._lt = frozenset(lt)
        table = {}
        for a in self.elements:
            table[(a, a)] = a
        for a, b in combinations(self.elements, 2):
            if self.leq(a, b):
                table[(a, b)] = table[(b, a)] = a
            elif self.leq(b, a):
                table[(a, b)] = table[(b, a)] = b
        for (a, b), m in (meets or {}).items():
            for e in (a, b, m):
                if e not in pos:
                    raise PosetError("meet %r ∩ %r = %r names an unknown element" % (a, b, m))
            for key in ((a, b), (b, a)):
                if key in table and table[key] != m:
                    raise PosetError("meet %r ∩ %r given as %r, but it is %r" % (a, b, m, table[key]))
                table[key] = m
        self._meet = table
        self._check_meets()

    def _check_meets(self):
        for a in self.elements:
            for b in self.elements:
                m = self._meet.get((a, b))
                if m is None:
                    raise PosetError("no meet given for %r and %r" % (a, b))
                if not (self.leq(m, a) and self.leq(m, b)):
                    raise PosetError("%r is not a lower bound of %r and %r" % (m, a, b))
                for l in self.elements:
                    if self.leq(l, a) and self.leq(l, b) and not self.leq(l, m):
                        raise PosetError("%r is not the greatest lower bound of %r and %r (see %r)"
                                         % (m, a, b, l))

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return "MeetPoset(%s)" % (list(self.elements),)

    def lt(self, a, b) -> bool:
        return (a, b) in self._lt

    def leq(self, a, b) -> bool:
        return a == b or (a, b) in self._lt

    def meet(self, a, b):
        return self._meet[(a, b)]

    def meet_all(self, items):
        items = list(items)
        m = items[0]
        for e in items[1:]:
            m = self.meet(m, e)
        return m

    def position(self, e) -> int:
        return self._pos[e]

    def relations(self) -> list:
        """All strict pairs ``(a, b)`` with ``a < b`` in element order."""
        return sorted(self._lt, key=lambda p: (self._pos[p[0]], self._pos[p[1]]))

    def order_chains(self, p: int) -> list:
        """Strict chains ``i_0 < i_1 < ... < i_p`` of the order itself."""
        out = [(e,) for e in self.elements]
        for _ in range(p):
            out = [c + (e,) for c in out for e in self.elements if self.lt(c[-1], e)]
        return sorted(out, key=lambda c: tuple(self._pos[e] for e in c))

    def restrict(self, subset) -> "MeetPoset":
        """The induced sub-poset; raises if it is not closed under meets."""
        sub = [e for e in self.elements if e in set(subset)]
        meets = {}
        for a, b in combinations(sub, 2):
            m = self.meet(a, b)
            if m not in sub:
                raise PosetError("subset is not closed under meets (%r ∩ %r = %r)" % (a, b, m))
            meets[(a, b)] = m
        less = [(a, b) for (a, b) in self._lt if a in sub and b in sub]
        return MeetPoset(sub, less, meets)


@dataclass(frozen=True)
class Chain:
    """A strictly increasing tuple of 1-based enumeration indices with its meet."""

    indices: tuple
    elements: tuple
    meet: object


def enumerate_chains(P: MeetPoset, p: int, enumeration=None) -> list:
    """All ``j_0 < ... < j_p`` in ``{1..d}`` (lexicographic), with the meet of ``i(j_0), ..., i(j_p)``."""
    enum = tuple(enumeration) if enumeration is not None else P.elements
    if sorted(enum, key=P.position) != sorted(P.elements, key=P.position) or len(enum) != len(P):
        raise PosetError("enumeration must list every poset element once")
    d = len(enum)
    if not 0 <= p < d:
        raise PosetError("chain length p=%d out of range 0..%d" % (p, d - 1))
    out = []
    for idx in combinations(range(1, d + 1), p + 1):
        els = tuple(enum[k - 1] for k in idx)
        out.append(Chain(idx, els, P.meet_all(els)))
    return out


class NcScheme:
    """Algebras ``A_i`` on a meet-poset with gluing maps ``phi_ij: A_j -> A_i`` for ``i < j``."""

    def __init__(self, name: str, poset: MeetPoset, algebras: dict, gluings: dict):
        self.name = name
        self.poset = poset
        missing = [i for i in poset.elements if i not in algebras]
        if missing:
            raise PosetError("no algebra for chart(s) %s" % missing)
        self.algebras = dict(algebras)
        rings = {A.ring for A in self.algebras.values()}
        if len(rings) != 1:
            raise PosetError("all charts must share one coefficient ring")
        self.ring = rings.pop()
        for (i, j) in gluings:
            if not poset.lt(i, j):
                raise PosetError("gluing %r <- %r given but %r < %r fails" % (i, j, i, j))
        for (i, j) in poset.relations():
            if (i, j) not in gluings:
                raise PosetError("missing gluing map phi_%s%s" % (i, j))
            h = gluings[(i, j)]
            if h.source is not self.algebras[j] or h.target is not self.algebras[i]:
                raise PosetError("gluing phi_%s%s has wrong source/target" % (i, j))
        self.gluings = dict(gluings)
        self._ids = {}

    def __repr__(self):
        return "NcScheme(%s, order=%d)" % (self.name, self.ring.order)

    @property
    def field(self) -> Field:
        return self.ring.field

    @property
    def rank(self) -> int:
        return len(self.ring.t_weight)

    def phi(self, i, j) -> AlgebraHom:
        """``phi_ij`` (the identity when ``i == j``)."""
        if i == j:
            h = self._ids.get(i)
            if h is None:
                h = self._ids[i] = AlgebraHom.identity(self.algebras[i])
            return h
        return self.gluings[(i, j)]

    def set_length_cap(self, cap: int):
        for A in self.algebras.values():
            A.length_cap = cap
            A._words.clear()
            A.cap_hits.clear()

    def cap_hits(self) -> dict:
        return {i: sorted(A.cap_hits) for i, A in self.algebras.items() if A.cap_hits}


# ---------------------------------------------------------------------------
# Declarative scheme data, instantiated at any nilpotency order


@dataclass
class ChartSpec:
    name: str
    letters: list  # [(letter, weight tuple)]
    rules: list  # ["lhs -> rhs"] (may mention t)


@dataclass
class SchemeSpec:
    """Textual scheme data that can be realized over ``k[t]/t^n`` for every ``n``.

    Realizing the same text at each order makes truncation between levels exact
    by construction; ``overrides`` replace individual rules or gluing images at
    one level (used to build deliberately inconsistent towers).
    """

    name: str
    poset: MeetPoset
    charts: dict  # element -> ChartSpec
    gluings: dict  # (i, j) -> {letter of A_j: image string in A_i}
    field: Field = dc_field(default_factory=Field)
    t_weight: tuple = (0,)
    length_cap: int = DEFAULT_LENGTH_CAP

    def instantiate(self, order: int = 1, overrides=None) -> NcScheme:
        ring = ArtinRing(self.field, order, tuple(self.t_weight))
        ov = overrides or {}
        rule_ov = ov.get("rules", {})  # chart -> {lhs text: full rule text}
        glue_ov = ov.get("gluings", {})  # (i, j) -> {letter: image}
        algebras = {}
        for i in self.poset.elements:
            cs = self.charts[i]
            rules = list(cs.rules)
            for lhs, new in rule_ov.get(i, {}).items():
                rules = [new if r.split("->")[0].strip() == lhs else r for r in rules]
            algebras[i] = build_algebra(cs.name, cs.letters, rules, ring, self.length_cap)
        gl = {}
        for (i, j) in self.poset.relations():
            imgs = dict(self.gluings[(i, j)])
            imgs.update(glue_ov.get((i, j), {}))
            gl[(i, j)] = AlgebraHom(algebras[j], algebras[i], imgs)
        return NcScheme(self.name, self.poset, algebras, gl)


class DeformationTower:
    """Schemes over ``k[t]/t^n`` for ``n = 1..N`` on one poset; level 1 is the base ``X^0``."""

    def __init__(self, name: str, levels: list):
        if not levels:
            raise PosetError("a tower needs at least one level")
        for n, S in enumerate(levels, start=1):
            if S.ring.order != n:
                raise PosetError("level %d is defined over k[t]/t^%d" % (n, S.ring.order))
            if S.poset is not levels[0].poset:
                raise PosetError("all levels must share one poset")
        self.name = name
        self.levels = list(levels)

    @classmethod
    def from_spec(cls, spec: SchemeSpec, top: int, overrides=None, name=None) -> "DeformationTower":
        ov = overrides or {}
        return cls(name or spec.name, [spec.instantiate(n, ov.get(n)) for n in range(1, top + 1)])

    @property
    def top(self) -> int:
        return len(self.levels)

    def level(self, n: int) -> NcScheme:
        return self.levels[n - 1]

    @property
    def poset(self) -> MeetPoset:
        return self.levels[0].poset


# ---------------------------------------------------------------------------
# Validation


@dataclass
class SchemeReport:
    hom_failures: list = dc_field(default_factory=list)
    cocycle_failures: list = dc_field(default_factory=list)
    surjectivity_failures: list = dc_field(default_factory=list)
    dimension_mismatches: list = dc_field(default_factory=list)
    confluence_failures: list = dc_field(default_factory=list)
    checked_overlaps: int = 0
    checked_chains: int = 0
    checked_meet_pairs: int = 0
    cap_warnings: dict = dc_field(default_factory=dict)
    assumptions: tuple = ("flatness of the gluing maps is assumed, not verified",
                          "birationality of the gluing maps is assumed, not verified",
                          "A_j (x)_{A_l} A_k -> A_i is checked for surjectivity in the window only",
                          "surjectivity uses products of normal words of length <= 8")

    @property
    def valid(self) -> bool:
        return not (self.hom_failures or self.cocycle_failures or self.confluence_failures
                    or self.surjectivity_failures or self.dimension_mismatches)

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "hom_failures": self.hom_failures,
            "cocycle_failures": self.cocycle_failures,
            "surjectivity_failures": self.surjectivity_failures,
            "dimension_mismatches": self.dimension_mismatches,
            "confluence_failures": self.confluence_failures,
            "checked_overlaps": self.checked_overlaps,
            "checked_chains": self.checked_chains,
            "cap_warnings": {str(i): [format_weight(w) for w in ws] for i, ws in sorted(self.cap_warnings.items())},
            "checked_meet_pairs": self.checked_meet_pairs,
            "assumptions": list(self.assumptions),
        }


def _all_normal_words(A: GradedAlgebra, max_len: int) -> list:
    """Every normal word of length <= max_len (any weight)."""
    sysm = A.system
    letters = [chr(0x100 + k) for k in range(len(A.alphabet.letters))]
    out = [""]
    frontier = [""]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for ch in letters:
                v = w + ch
                if sysm.is_normal(v):
                    nxt.append(v)
        out.extend(nxt)
        frontier = nxt
    return out


def surjectivity_check(S: NcScheme, i, j, k, weight) -> object:
    """Is every element of ``A_i`` at ``weight`` a k-combination of ``t^m phi_ij(b_j) phi_ik(b_k)``?

    Returns ``None`` when surjective, else a basis pair of ``A_i`` outside the span.
    """
    Ai = S.algebras[i]
    basis = Ai.graded_basis(weight)
    if not basis:
        return None
    index = {key: n for n, key in enumerate(basis)}
    cap = min(Ai.length_cap, SURJECTIVITY_WORD_LENGTH)
    wj = _normal_words_by_weight(S.algebras[j], cap)
    wk = _normal_words_by_weight(S.algebras[k], cap)
    ech = linalg.Echelon()
    one = S.field.one
    tw = S.ring.t_weight
    for m in range(S.ring.order):
        target = wsub(tuple(weight), wscale(m, tw))
        for u, words_j in wj.items():
            rest = wsub(target, u)
            for bk in wk.get(rest, ()):
                right = S.phi(i, k).apply({(bk, 0): one})
                for bj in words_j:
                    prod = Ai.mul(S.phi(i, j).apply({(bj, 0): one}), right)
                    prod = Ai.times_t(prod, m)
                    vec = {index[key]: c for key, c in prod.items() if key in index}
                    ech.add(vec)
                    if len(ech) == len(basis):
                        return None
    for n, key in enumerate(basis):
        if not ech.contains({n: one}):
            return key
    return None


# Products phi(b_j) phi(b_k) are formed from normal words of at most this many
# letters.  A bound that is too small can only produce spurious failures.
SURJECTIVITY_WORD_LENGTH = 8

_WORD_CACHE = {}


def _normal_words_by_weight(A: GradedAlgebra, cap: int) -> dict:
    key = (id(A), cap)
    got = _WORD_CACHE.get(key)
    if got is None or got[0] is not A:
        buckets = {}
        for w in _all_normal_words(A, cap):
            buckets.setdefault(A.weight_of(w), []).append(w)
        got = _WORD_CACHE[key] = (A, buckets)
    return got[1]


def validate_scheme(S: NcScheme, window: Window, length_cap: int | None = None,
                    expected_tensor_dims: dict | None = None) -> SchemeReport:
    """Gluing maps are homomorphisms, satisfy the cocycle identity, and are jointly surjective on meets.

    ``expected_tensor_dims`` optionally maps ``(j, k, weight)`` to the graded
    dimension of ``A_j (x)_{A_l} A_k``; it is compared with ``dim A_{j∩k}``.
    """
    if length_cap is not None:
        S.set_length_cap(length_cap)
    rep = SchemeReport()
    P = S.poset
    for i in P.elements:
        A = S.algebras[i]
        conf = A.system.check_local_confluence()
        rep.checked_overlaps += conf.checked
        for amb in conf.unresolved:
            rep.confluence_failures.append({
                "chart": i, "overlap": A.alphabet.format_word(amb.word),
                "left": A.format(amb.left), "right": A.format(amb.right)})
    for (i, j) in P.relations():
        hr = check_hom(S.gluings[(i, j)])
        if not hr.valid:
            rep.hom_failures.append({"gluing": [i, j], "weight_errors": hr.weight_errors,
                                     "failed_rules": [list(x) for x in hr.failed_rules]})
    for (i, j, k) in P.order_chains(2):
        rep.checked_chains += 1
        lhs = compose_hom(S.phi(i, j), S.phi(j, k))
        rhs = S.phi(i, k)
        for ch in sorted(rhs.images):
            if lhs.images[ch] != rhs.images[ch]:
                A = S.algebras[i]
                rep.cocycle_failures.append({
                    "chain": [i, j, k], "letter": S.algebras[k].alphabet.name(ch),
                    "composite": A.format(lhs.images[ch]), "direct": A.format(rhs.images[ch])})
    for j, k in combinations(P.elements, 2):
        i = P.meet(j, k)
        if i in (j, k):
            continue
        rep.checked_meet_pairs += 1
        for w in window.weights():
            witness = surjectivity_check(S, i, j, k, w)
            if witness is not None:
                A = S.algebras[i]
                rep.surjectivity_failures.append({
                    "meet": i, "pair": [j, k], "weight": format_weight(w),
                    "missing": A.format({witness: S.field.one})})
            if expected_tensor_dims and (j, k, w) in expected_tensor_dims:
                have = len(S.algebras[i].graded_basis(w))
                want = expected_tensor_dims[(j, k, w)]
                if have != want:
                    rep.dimension_mismatches.append({"pair": [j, k], "weight": format_weight(w),
                                                     "meet_dim": have, "tensor_dim": want})
    rep.cap_warnings = S.cap_hits()
    return rep


@dataclass
class TowerReport:
    level_reports: list = dc_field(default_factory=list)  # SchemeReport per level
    flatness_failures: list = dc_field(default_factory=list)
    reduction_failures: list = dc_field(default_factory=list)
    dims: dict = dc_field(default_factory=dict)  # (level, chart) -> {weight: dim}

    @property
    def valid(self) -> bool:
        return (all(r.valid for r in self.level_reports)
                and not self.flatness_failures and not self.reduction_failures)

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "levels": [r.to_json() for r in self.level_reports],
            "flatness_failures": self.flatness_failures,
            "reduction_failures": self.reduction_failures,
            "dims": {"%d:%s" % key: {format_weight(w): d for w, d in sorted(v.items())}
                     for key, v in sorted(self.dims.items(), key=lambda kv: (kv[0][0], str(kv[0][1])))},
        }


def _rules_as_text(A: GradedAlgebra) -> set:
    return {A.system.format_rule(r) for r in A.system.rules}


def validate_tower(T: DeformationTower, window: Window, length_cap: int | None = None) -> TowerReport:
    """Per-level scheme validation, graded flatness over R, and exactness of level-to-level truncation.

    Flatness surrogate: ``dim_k A_i^(n)_w = sum_{0<=j<n} dim_k A_i^(1)_{w - j*wt(t)}``,
    which is ``n * dim_k A_i^(1)_w`` when t has weight zero.
    """
    rep = TowerReport()
    base = T.level(1)
    for n, S in enumerate(T.levels, start=1):
        rep.level_reports.append(validate_scheme(S, window, length_cap))
        tw = S.ring.t_weight
        for i in T.poset.elements:
            A, A0 = S.algebras[i], base.algebras[i]
            dims = {}
            for w in window.weights():
                have = len(A.graded_basis(w))
                want = sum(len(A0.graded_basis(wsub(w, wscale(j, tw)))) for j in range(n))
                dims[w] = have
                if have != want:
                    rep.flatness_failures.append({"level": n, "chart": i, "weight": format_weight(w),
                                                  "dim": have, "expected": want})
            rep.dims[(n, i)] = dims
        if n > 1:
            lower = T.level(n - 1)
            for i in T.poset.elements:
                trunc = S.algebras[i].truncate(n - 1)
                have, want = _rules_as_text(trunc), _rules_as_text(lower.algebras[i])
                if have != want or trunc.alphabet != lower.algebras[i].alphabet:
                    rep.reduction_failures.append({
                        "level": n, "chart": i, "what": "relations",
                        "truncated": sorted(have - want), "declared": sorted(want - have)})
            for (i, j) in T.poset.relations():
                h, g = S.gluings[(i, j)], lower.gluings[(i, j)]
                for ch, img in sorted(h.images.items()):
                    red = {(w, m): c for (w, m), c in img.items() if m < n - 1}
                    if red != g.images[ch]:
                        rep.reduction_failures.append({
                            "level": n, "gluing": [i, j], "what": "gluing",
                            "letter": h.source.alphabet.name(ch),
                            "truncated": g.target.format(red), "declared": g.target.format(g.images[ch])})
    return rep
