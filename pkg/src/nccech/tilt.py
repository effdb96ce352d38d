"""Tilting checks: Ext vanishing, the endomorphism algebra, flatness over R,
generation witnesses and the images ``Phi(x) = RHom(F, x)`` with their right E-action.

All statements are relative to a weight window.  The composition in ``E`` is
``(f g)_i = f_i g_i`` (first ``g``, then ``f``), so a complex ``Hom(F, x)`` is
a right ``E``-module via ``z . e = z o e``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .algebra import matrix_mul
from .cech import CohomologyReport, HomComplex, ModuleComplex, as_complex, ext
from .coeff import Window, flat_rank_pattern, format_weight, wadd, wscale
from .qcoh import LocallyFreeModule, format_matrix, matrix_times_t, transport
from . import linalg


# ---------------------------------------------------------------------------
# pretilting


@dataclass
class TiltingReport:
    module: str
    ext: CohomologyReport
    pretilting: bool
    qualifier: str
    pmax: int

    def ext_table(self) -> dict:
        return {p: self.ext.dim(p) for p in self.ext.degrees}

    def to_json(self) -> dict:
        return {"module": self.module, "pretilting": self.pretilting, "qualifier": self.qualifier,
                "pmax": self.pmax, "ext_dims": {str(p): d for p, d in self.ext_table().items()},
                "ext": self.ext.to_json(with_reps=False)}


def pretilting_check(F: LocallyFreeModule, pmax: int, window: Window) -> TiltingReport:
    d = len(F.scheme.poset)
    top = min(pmax, d - 1)
    rep = ext(F, F, window, pmax=top)
    ok = all(rep.dim(p) == 0 for p in rep.degrees if p > 0)
    qual = "in-window"
    if rep.cap_warnings:
        qual = "in-window only (word-length cap reached at some weights)"
    return TiltingReport(F.name, rep, ok, qual, top)


# ---------------------------------------------------------------------------
# the endomorphism algebra


class _GlobalHoms:
    """Degree-0 cocycles of ``Hom(F, N)`` per weight with coordinate solving."""

    def __init__(self, F: LocallyFreeModule, N: LocallyFreeModule, window: Window):
        self.H = HomComplex(F, N)
        self.window = window
        self.basis = {}  # w -> [collection]
        self._ech = {}
        one = F.scheme.field.one
        for w in window.weights():
            term = self.H.term(0, w)
            Z = linalg.kernel(self.H.differential(0, w), one)
            ech = linalg.Echelon()
            for k, z in enumerate(Z):
                ech.add(z, tag=k)
            self._ech[w] = ech
            colls = []
            for z in Z:
                comps = term.vector_to_components(z)
                colls.append({blk.chart: comps.get(blk.key, blk.space.to_matrix({})) for blk in term.blocks})
            self.basis[w] = colls

    def coords(self, w, coll) -> dict:
        term = self.H.term(0, w)
        vec = {}
        for blk in term.blocks:
            for n, c in blk.space.coords(coll[blk.chart]).items():
                vec[blk.offset + n] = c
        r, expr = self._ech[w].reduce(vec)
        if r:
            raise ValueError("collection is not a global homomorphism")
        return {k: c for k, c in expr.items() if c}


@dataclass
class EndomorphismAlgebra:
    module: LocallyFreeModule
    window: Window
    basis: list  # [(weight, collection)]
    structure: dict  # (a, b) -> {c: coeff}; absent when the product weight leaves the window
    unit: dict | None
    t_action: dict  # a -> {c: coeff} or None (outside the window)
    field: object
    order: int
    t_weight: tuple
    _homs: object = None

    @property
    def dim(self) -> int:
        return len(self.basis)

    def weight(self, a: int):
        return self.basis[a][0]

    def dims(self) -> dict:
        out = {}
        for w, _ in self.basis:
            out[w] = out.get(w, 0) + 1
        return out

    def index_range(self, w) -> list:
        return [a for a, (u, _) in enumerate(self.basis) if u == tuple(w)]

    def coords(self, w, coll) -> dict:
        off = self.index_range(w)
        return {off[k]: c for k, c in self._homs.coords(w, coll).items()}

    def mul(self, x: dict, y: dict) -> dict | None:
        """Product of coordinate vectors; ``None`` if some needed product leaves the window."""
        out = {}
        for a, ca in x.items():
            for b, cb in y.items():
                s = self.structure.get((a, b))
                if s is None:
                    return None
                linalg.axpy(out, ca * cb, s)
        return out

    def times_t(self, x: dict) -> dict | None:
        out = {}
        for a, c in x.items():
            s = self.t_action.get(a)
            if s is None:
                return None
            linalg.axpy(out, c, s)
        return out

    def associativity_failures(self) -> list:
        bad = []
        n = self.dim
        for a in range(n):
            for b in range(n):
                ab = self.structure.get((a, b))
                if ab is None:
                    continue
                for c in range(n):
                    bc = self.structure.get((b, c))
                    if bc is None:
                        continue
                    left = self.mul(ab, {c: self.field.one})
                    right = self.mul({a: self.field.one}, bc)
                    if left is not None and right is not None and left != right:
                        bad.append([a, b, c])
        return bad

    def unit_failures(self) -> list:
        if self.unit is None:
            return ["unit weight outside the window"]
        bad = []
        for a in range(self.dim):
            e = {a: self.field.one}
            if self.mul(self.unit, e) != e or self.mul(e, self.unit) != e:
                bad.append(a)
        return bad

    def t_central_failures(self) -> list:
        bad = []
        one = self.field.one
        for (a, b), s in self.structure.items():
            ta, tb = self.times_t({a: one}), self.times_t({b: one})
            if ta is None or tb is None:
                continue
            x, y, z = self.mul(ta, {b: one}), self.mul({a: one}, tb), self.times_t(s)
            if None in (x, y, z):
                continue
            if not (x == y == z):
                bad.append([a, b])
        return bad

    def label(self, a: int) -> str:
        w = self.basis[a][0]
        return "e%d[%s]" % (a, format_weight(w))

    def to_json(self) -> dict:
        fmt = self.field.format
        S = self.module.scheme
        return {
            "module": self.module.name, "dim": self.dim, "order": self.order,
            "dims_by_weight": {format_weight(w): d for w, d in sorted(self.dims().items())},
            "basis": [{"label": self.label(a), "weight": format_weight(w),
                       "components": {str(i): format_matrix(S.algebras[i], coll[i]) for i in S.poset.elements}}
                      for a, (w, coll) in enumerate(self.basis)],
            "structure_constants": [[a, b, c, fmt(v)] for (a, b), s in sorted(self.structure.items())
                                    for c, v in sorted(s.items())],
            "unit": None if self.unit is None else [[a, fmt(v)] for a, v in sorted(self.unit.items())],
            "t_action": [[a, c, fmt(v)] for a, s in sorted(self.t_action.items()) if s is not None
                         for c, v in sorted(s.items())],
            "associative": not self.associativity_failures(),
            "unit_laws": not self.unit_failures(),
            "t_central": not self.t_central_failures(),
            "notes": ["window-relative result: products leaving the window are not recorded"],
        }


def end_algebra(F: LocallyFreeModule, window: Window) -> EndomorphismAlgebra:
    S = F.scheme
    G = _GlobalHoms(F, F, window)
    basis = [(w, coll) for w in window.weights() for coll in G.basis[w]]
    E = EndomorphismAlgebra(F, window, basis, {}, None, {}, S.field, S.ring.order, S.ring.t_weight, G)
    for a, (u, f) in enumerate(basis):
        for b, (v, g) in enumerate(basis):
            w = wadd(u, v)
            if w not in window:
                continue
            prod = {i: matrix_mul(S.algebras[i], f[i], g[i]) for i in S.poset.elements}
            E.structure[(a, b)] = E.coords(w, prod)
        w = wadd(u, S.ring.t_weight)
        if w in window:
            E.t_action[a] = E.coords(w, {i: matrix_times_t(S.algebras[i], f[i], 1) for i in S.poset.elements})
        else:
            E.t_action[a] = None
    zero = (0,) * S.rank
    if zero in window:
        ident = {i: [[S.algebras[i].one() if a == b else {} for b in range(F.rank)] for a in range(F.rank)]
                 for i in S.poset.elements}
        E.unit = E.coords(zero, ident)
    return E


# ---------------------------------------------------------------------------
# flatness of E over R


@dataclass
class FlatnessReport:
    flat: bool
    order: int
    rank_over_R: int | None
    free_on_lifted_basis: bool
    lifted_basis_spans: bool
    reduction_surjective: bool
    reduction_constants_match: bool | None
    dim_E: int
    dim_E0: int
    dim_R_span: int
    t_rank_pattern: dict | None
    mismatches: list = dc_field(default_factory=list)

    def to_json(self) -> dict:
        return {"flat": self.flat, "order": self.order, "rank_over_R": self.rank_over_R,
                "free_on_lifted_basis": self.free_on_lifted_basis,
                "lifted_basis_spans": self.lifted_basis_spans,
                "reduction_surjective": self.reduction_surjective,
                "reduction_constants_match": self.reduction_constants_match,
                "dim_E_window": self.dim_E, "dim_E0_window": self.dim_E0,
                "dim_R_span_of_lifts": self.dim_R_span, "n_times_dim_E0": self.order * self.dim_E0,
                "t_rank_pattern": self.t_rank_pattern, "mismatches": self.mismatches[:20],
                "notes": ["window-relative result"]}


def reduce_collection(coll: dict, F0: LocallyFreeModule) -> dict:
    return {i: [[{k: c for k, c in e.items() if k[1] == 0} for e in row] for row in M] for i, M in coll.items()}


def flatness_check(E: EndomorphismAlgebra, E0: EndomorphismAlgebra | None = None,
                   window: Window | None = None) -> FlatnessReport:
    """Freeness of ``E`` over ``R = k[t]/t^n`` on the window, and ``E/tE`` against ``E⁰``.

    ``E`` and ``E0`` must be computed on ``window.extend(wt, n - 1)`` so that
    ``t^j`` times window elements stay visible.  Everything is done in
    coordinates (the recorded t-action), so a corrupted t-action is detected.
    """
    n = E.order
    window = window or E.window
    wt = E.t_weight
    one = E.field.one
    inner = [a for a in range(E.dim) if E.weight(a) in window]
    if n == 1:
        return FlatnessReport(True, 1, len(inner), True, True, True, None, len(inner), len(inner),
                              len(inner), {"free": True, "rank": len(inner)})
    if E0 is None:
        raise ValueError("flatness over k[t]/t^n (n > 1) needs the level-1 algebra")
    F0 = E0.module
    # reduction map E_w -> E0_w and lifts of the E0 basis
    lifts = {}
    surj = True
    for w in {E0.weight(b) for b in range(E0.dim)}:
        cols = []
        idx = E.index_range(w)
        for a in idx:
            cols.append(E0.coords(w, reduce_collection(E.basis[a][1], F0)))
        for b in E0.index_range(w):
            sol = linalg.solve(cols, {b: one})
            if sol is None:
                surj = False
                continue
            lifts[b] = {idx[k]: c for k, c in sol.items()}
    gens = [b for b in range(E0.dim) if E0.weight(b) in window and b in lifts]
    # R-span of the lifts: t^j * lift_b for j < n
    vectors = []
    ok_visible = True
    for b in gens:
        v = dict(lifts[b])
        for j in range(n):
            if v is None:
                ok_visible = False
                break
            vectors.append(v)
            if j + 1 < n:
                v = E.times_t(v)
    span_dim = linalg.rank(vectors)
    free = ok_visible and span_dim == n * len(gens)
    # does the R-span exhaust E on the window?
    ech = linalg.Echelon()
    for v in vectors:
        ech.add(v)
    spans = all(ech.contains({a: one}) for a in inner)
    # E/tE structure constants against E0
    match = True
    mismatches = []
    for (b1, b2), s0 in E0.structure.items():
        if b1 not in lifts or b2 not in lifts:
            continue
        w = wadd(E0.weight(b1), E0.weight(b2))
        prod = E.mul(lifts[b1], lifts[b2])
        if prod is None:
            continue
        red = {}
        for a, c in prod.items():
            red_a = E0.coords(w, reduce_collection(E.basis[a][1], F0))
            linalg.axpy(red, c, red_a)
        if red != s0:
            match = False
            mismatches.append([b1, b2])
    pattern = None
    if not any(wt):
        mat = [[E.t_action[c].get(r, 0) if E.t_action[c] is not None else 0 for c in inner] for r in inner]
        free_t, rank_t = flat_rank_pattern(mat, n, E.field)
        pattern = {"free": free_t, "rank": rank_t}
    elif free:
        # t acting on the R-span of the lifts, read off the recorded t-action
        mat = [[0] * len(vectors) for _ in vectors]
        for k, v in enumerate(vectors):
            tv = E.times_t(v)
            if tv is None:
                if (k + 1) % n:
                    mat = None
                    break
                continue
            sol = linalg.solve(vectors, tv)
            if sol is None:
                mat = None
                break
            for r, c in sol.items():
                mat[r][k] = c
        if mat is not None:
            free_t, rank_t = flat_rank_pattern(mat, n, E.field)
            pattern = {"free": free_t, "rank": rank_t, "on": "R-span of lifted basis"}
    flat = surj and free and spans and match and (pattern is None or pattern["free"])
    return FlatnessReport(flat, n, len(gens) if flat else None, free, spans, surj, match, len(inner),
                          len([b for b in range(E0.dim) if E0.weight(b) in window]), span_dim, pattern,
                          mismatches)


# ---------------------------------------------------------------------------
# generation and Phi-images


@dataclass
class GenerationResult:
    test_object: str
    witness_degree: int | None
    dims: dict
    report: CohomologyReport

    @property
    def verdict(self) -> str:
        return "witness" if self.witness_degree is not None else "inconclusive in window"

    def to_json(self) -> dict:
        return {"test_object": self.test_object, "verdict": self.verdict,
                "witness_degree": self.witness_degree,
                "dims": {str(p): d for p, d in sorted(self.dims.items())},
                "claim": "RHom(F, x) is nonzero in the window; generation is only certified for the listed test objects"}


def generation_check(F: LocallyFreeModule, x, window: Window) -> GenerationResult:
    X = as_complex(x)
    rep = HomComplex(F, X).cohomology(window)
    dims = rep.totals()
    nz = [p for p, d in dims.items() if d]
    return GenerationResult(X.name, max(nz) if nz else None, dims, rep)


@dataclass
class PhiImage:
    test_object: str
    report: CohomologyReport
    action: dict  # (degree, weight, rep index, basis index) -> coords in H at weight + wt(e)
    module_axioms_ok: bool
    unit_ok: bool
    t_commutes: bool
    euler_from_terms: int
    euler_from_cohomology: int
    checked_triples: int

    def dims(self) -> dict:
        return self.report.totals()

    def to_json(self) -> dict:
        fmt = self.report.field.format if self.report.field else str
        act = [[n, format_weight(w), i, b, [[k, fmt(c)] for k, c in sorted(v.items())]]
               for (n, w, i, b), v in sorted(self.action.items())]
        return {"test_object": self.test_object,
                "dims": {str(p): d for p, d in sorted(self.dims().items())},
                "cohomology": self.report.to_json(with_reps=False),
                "right_E_action": act, "module_axioms_ok": self.module_axioms_ok,
                "unit_acts_trivially": self.unit_ok, "t_commutes": self.t_commutes,
                "checked_triples": self.checked_triples,
                "euler_from_terms": self.euler_from_terms,
                "euler_from_cohomology": self.euler_from_cohomology,
                "euler_consistent": self.euler_from_terms == self.euler_from_cohomology}


def _compose_right(H: HomComplex, vec: dict, src_term, dst_term, coll) -> dict:
    """``z o e`` for a cochain ``z`` and an endomorphism collection ``e`` of F."""
    S = H.scheme
    out = {}
    comps = src_term.vector_to_components(vec)
    for key, M in comps.items():
        blk = src_term.by_key[key]
        m = blk.chart
        prod = matrix_mul(S.algebras[m], M, coll[m])
        tb = dst_term.by_key[key]
        for n, c in tb.space.coords(prod).items():
            linalg.axpy(out, c, {tb.offset + n: 1})
    return out


def phi_image(F: LocallyFreeModule, x, window: Window, E: EndomorphismAlgebra | None = None) -> PhiImage:
    """Cohomology of ``Hom(F, Č(x))`` with the right E-action, verified against E's structure constants."""
    X = as_complex(x)
    E = E if E is not None else end_algebra(F, window)
    H = HomComplex(F, X)
    rep = H.cohomology(window)
    one = F.scheme.field.one
    action = {}
    for (n, w), e in rep.entries.items():
        for i, z in enumerate(e.reps):
            for b, (u, coll) in enumerate(E.basis):
                w2 = wadd(w, u)
                tgt = rep.entries.get((n, w2))
                if tgt is None:
                    continue
                img = _compose_right(H, z, e.term, tgt.term, coll)
                action[(n, w, i, b)] = tgt.quotient.coords(img)

    def act(n, w, vec, b):
        """Apply basis element b to a class given by coords at (n, w)."""
        out = {}
        for i, c in vec.items():
            a = action.get((n, w, i, b))
            if a is None:
                return None
            linalg.axpy(out, c, a)
        return out

    ok = True
    checked = 0
    for (n, w), e in rep.entries.items():
        for i in range(e.dim):
            for (b, c), s in E.structure.items():
                u = wadd(w, E.weight(b))
                first = act(n, w, {i: one}, b)
                if first is None:
                    continue
                lhs = act(n, u, first, c)
                if lhs is None:
                    continue
                rhs = {}
                good = True
                for d_, coef in s.items():
                    r = action.get((n, w, i, d_))
                    if r is None:
                        good = False
                        break
                    linalg.axpy(rhs, coef, r)
                if not good:
                    continue
                checked += 1
                if lhs != rhs:
                    ok = False
    unit_ok = True
    if E.unit is not None:
        for (n, w), e in rep.entries.items():
            for i in range(e.dim):
                tot = {}
                for b, c in E.unit.items():
                    a = action.get((n, w, i, b))
                    if a is not None:
                        linalg.axpy(tot, c, a)
                if tot != {i: one}:
                    unit_ok = False
    t_ok = True
    for (n, w), e in rep.entries.items():
        if e.t_action is None:
            continue
        w_t = wadd(w, rep.t_weight)
        for i in range(e.dim):
            for b in range(E.dim):
                u = E.weight(b)
                # (t z) . b  versus  (z . b) * t
                a1 = act(n, w_t, e.t_action[i], b)
                zb = action.get((n, w, i, b))
                tgt = rep.entries.get((n, wadd(w, u)))
                if a1 is None or zb is None or tgt is None or tgt.t_action is None:
                    continue
                a2 = {}
                for k, c in zb.items():
                    linalg.axpy(a2, c, tgt.t_action[k])
                if a1 != a2:
                    t_ok = False
    chi_terms = sum(H.euler_characteristic(window).values())
    chi_coh = sum((-1) ** (p % 2) * d for p, d in rep.totals().items())
    return PhiImage(X.name, rep, action, ok, unit_ok, t_ok, chi_terms, chi_coh, checked)
