"""The poset Čech complex, Hom complexes into it, and Ext by exact linear algebra per weight.

Chains are strictly increasing tuples ``j_0 < ... < j_p`` of enumeration
indices ``1..d``; the term of a chain is the pushforward from its meet.  The
differential inserts one index ``j_k`` with sign ``(-1)^k`` and applies the
restriction map.

Under ``Hom_A(F, [N_s]) = Hom_{A_s}(F_s, N_s)`` the restriction from ``s`` to
``q = s ∩ i`` acts on local homomorphisms by
``H -> Psi^N_qs phi_qs(H) (Psi^F_qs)^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .coeff import Window, flat_rank_pattern, format_weight, wadd
from .algebra import matrix_apply_hom, matrix_mul
from .qcoh import LocallyFreeModule, MatrixSpace, ModuleError, ModuleMap, format_matrix
from .scheme import enumerate_chains
from . import linalg


# ---------------------------------------------------------------------------
# bounded complexes of locally free modules


class ModuleComplex:
    """``... -> X^q -> X^{q+1} -> ...`` with module maps ``maps[q]: X^q -> X^{q+1}``."""

    def __init__(self, name: str, terms: dict, maps: dict | None = None):
        if not terms:
            raise ModuleError("a complex needs at least one term")
        self.name = name
        self.terms = dict(sorted(terms.items()))
        schemes = {id(m.scheme) for m in self.terms.values()}
        if len(schemes) != 1:
            raise ModuleError("complex %s mixes schemes" % name)
        self.scheme = next(iter(self.terms.values())).scheme
        self.maps = dict(maps or {})
        for q, h in self.maps.items():
            if self.terms.get(q) is not h.source or self.terms.get(q + 1) is not h.target:
                raise ModuleError("complex %s: map in degree %d has wrong source/target" % (name, q))

    @classmethod
    def single(cls, M: LocallyFreeModule, degree: int = 0, name: str | None = None) -> "ModuleComplex":
        return cls(name or ("%s[%d]" % (M.name, -degree) if degree else M.name), {degree: M})

    def shift(self, k: int, name: str | None = None) -> "ModuleComplex":
        """``X[k]``: the term of ``X`` in degree ``q`` moves to degree ``q - k``.

        Differentials are kept as they are (no sign change), which does not
        affect cohomology dimensions.
        """
        return ModuleComplex(name or "%s[%d]" % (self.name, k),
                             {q - k: M for q, M in self.terms.items()},
                             {q - k: h for q, h in self.maps.items()})

    def composition_failures(self) -> list:
        """Degrees where ``d^{q+1} d^q != 0`` (as matrices, chartwise)."""
        out = []
        S = self.scheme
        for q in self.maps:
            if q + 1 in self.maps:
                for i in S.poset.elements:
                    prod = matrix_mul(S.algebras[i], self.maps[q + 1].components[i], self.maps[q].components[i])
                    if any(e for row in prod for e in row):
                        out.append([q, i])
        return out


def as_complex(x) -> ModuleComplex:
    return x if isinstance(x, ModuleComplex) else ModuleComplex.single(x)


# ---------------------------------------------------------------------------
# generic graded complex bookkeeping


@dataclass
class Block:
    key: tuple  # (p, q, chain indices)
    chart: object
    space: MatrixSpace
    offset: int


class Term:
    def __init__(self, blocks):
        self.blocks = blocks
        self.by_key = {b.key: b for b in blocks}
        self.dim = sum(len(b.space) for b in blocks)

    def locate(self, n: int):
        for b in self.blocks:
            if b.offset <= n < b.offset + len(b.space):
                return b, n - b.offset
        raise IndexError(n)

    def vector_to_components(self, vec: dict) -> dict:
        """Split a coordinate vector into ``{block key: matrix}``."""
        parts = {}
        for n, c in vec.items():
            b, k = self.locate(n)
            parts.setdefault(b.key, {})[k] = c
        return {key: self.by_key[key].space.to_matrix(v) for key, v in parts.items()}


def _add_matrix(col: dict, block: Block, M, sign):
    for a, row in enumerate(M):
        for b, e in enumerate(row):
            for key, c in e.items():
                n = block.space.index.get((a, b, key))
                if n is None:
                    raise ModuleError("image term %s leaves the graded piece (length cap too small?)"
                                      % block.space.A.format({key: c}))
                n += block.offset
                v = col.get(n)
                v = sign * c if v is None else v + sign * c
                if v:
                    col[n] = v
                else:
                    col.pop(n, None)


# ---------------------------------------------------------------------------
# Hom complex Hom_A(F, Č^•(X))


class HomComplex:
    """Total complex of ``Hom_A(F, Č^p(X^q))`` in degree ``p + q``.

    The differential is ``d_Čech + (-1)^p d_X``.  ``sign_mutation=(p, k)``
    flips the sign of the ``k``-th insertion in ``d^p`` (for mutation tests).
    """

    def __init__(self, F: LocallyFreeModule, target, enumeration=None, sign_mutation=None):
        self.F = F
        self.X = as_complex(target)
        if self.X.scheme is not F.scheme:
            raise ModuleError("Hom complex between modules on different schemes")
        self.scheme = F.scheme
        P = self.scheme.poset
        self.enumeration = tuple(enumeration) if enumeration is not None else P.elements
        self.d = len(P)
        self.chains = [enumerate_chains(P, p, self.enumeration) for p in range(self.d)]
        self.sign_mutation = sign_mutation
        qs = list(self.X.terms)
        self.degrees = list(range(min(qs), self.d - 1 + max(qs) + 1))
        self._terms = {}
        self._res = {}
        self._diff = {}

    @property
    def ring(self):
        return self.scheme.ring

    def term(self, n: int, w) -> Term:
        key = (n, tuple(w))
        t = self._terms.get(key)
        if t is None:
            blocks = []
            off = 0
            for q, N in self.X.terms.items():
                p = n - q
                if not 0 <= p < self.d:
                    continue
                for ch in self.chains[p]:
                    m = ch.meet
                    sp = MatrixSpace(self.scheme.algebras[m], N.shifts[m], self.F.shifts[m], w)
                    blocks.append(Block((p, q, ch.indices), m, sp, off))
                    off += len(sp)
            t = self._terms[key] = Term(blocks)
        return t

    def _res_data(self, N: LocallyFreeModule, q, s):
        key = (id(N), q, s)
        got = self._res.get(key)
        if got is None:
            finv = self.F.psi_inv(q, s)
            if finv is None:
                raise ModuleError("psi_%s%s of %s has no inverse in the window" % (q, s, self.F.name))
            got = self._res[key] = (N.psi(q, s), finv, self.scheme.phi(q, s))
        return got

    def restrict(self, N: LocallyFreeModule, q, s, a, b, u: dict):
        """``Psi^N_qs phi_qs(E_ab u) (Psi^F_qs)^{-1}`` for a single-entry matrix."""
        A = self.scheme.algebras[q]
        psiN, finv, phi = self._res_data(N, q, s)
        pu = phi.apply(u)
        out = [[{} for _ in range(self.F.rank)] for _ in range(N.rank)]
        if not pu:
            return out
        for a2 in range(N.rank):
            left = psiN[a2][a]
            if not left:
                continue
            lu = A.mul(left, pu)
            if not lu:
                continue
            for b2 in range(self.F.rank):
                right = finv[b][b2]
                if right:
                    out[a2][b2] = A.mul(lu, right)
        return out

    def differential(self, n: int, w) -> list:
        """Columns (sparse vectors in term ``n+1``) of ``D: T^n_w -> T^{n+1}_w``."""
        key = (n, tuple(w))
        if key not in self._diff:
            self._diff[key] = self._differential(n, w)
        return self._diff[key]

    def _differential(self, n: int, w) -> list:
        src, dst = self.term(n, w), self.term(n + 1, w)
        one = self.scheme.field.one
        cols = []
        for blk in src.blocks:
            p, q, idx = blk.key
            N = self.X.terms[q]
            S = blk.chart
            for k_basis, (a, b, key) in enumerate(blk.space.keys):
                col = {}
                u = {key: one}
                # Čech part
                if p + 1 < self.d:
                    for x in range(1, self.d + 1):
                        if x in idx:
                            continue
                        J = tuple(sorted(idx + (x,)))
                        k = J.index(x)
                        sign = -one if k % 2 else one
                        if self.sign_mutation == (p, k):
                            sign = -sign
                        tb = dst.by_key[(p + 1, q, J)]
                        _add_matrix(col, tb, self.restrict(N, tb.chart, S, a, b, u), sign)
                # complex part
                h = self.X.maps.get(q)
                if h is not None:
                    tb = dst.by_key.get((p, q + 1, idx))
                    if tb is not None:
                        A = self.scheme.algebras[S]
                        M = [[{} for _ in range(self.F.rank)] for _ in range(h.target.rank)]
                        for a2 in range(h.target.rank):
                            if h.components[S][a2][a]:
                                M[a2][b] = A.mul(h.components[S][a2][a], u)
                        _add_matrix(col, tb, M, -one if p % 2 else one)
                cols.append(col)
        return cols

    # -- cohomology ----------------------------------------------------------

    def dd_failures(self, window: Window) -> list:
        bad = []
        for w in window.weights():
            for n in self.degrees:
                d1 = self.differential(n, w)
                d2 = self.differential(n + 1, w)
                for j, col in enumerate(d1):
                    if linalg.apply(d2, col):
                        bad.append({"degree": n, "weight": format_weight(w), "column": j})
                        break
        return bad

    def cohomology_at(self, n: int, w):
        """``(Quotient, term)`` for ``H^n`` at weight ``w``."""
        term = self.term(n, w)
        cycles = linalg.kernel(self.differential(n, w), self.scheme.field.one)
        boundaries = self.differential(n - 1, w) if (n - 1) >= self.degrees[0] else []
        return linalg.Quotient(cycles, boundaries), term

    def cohomology(self, window: Window, degrees=None) -> "CohomologyReport":
        degrees = self.degrees if degrees is None else [n for n in degrees if n in self.degrees]
        rep = CohomologyReport(window=window, degrees=list(degrees), t_weight=self.ring.t_weight,
                               order=self.ring.order, field=self.scheme.field)
        for w in window.weights():
            for n in degrees:
                Q, term = self.cohomology_at(n, w)
                rep.entries[(n, w)] = CohomologyEntry(n, w, Q.dim, Q.reps, term, Q)
        wt = self.ring.t_weight
        for (n, w), e in rep.entries.items():
            w2 = wadd(w, wt)
            tgt = rep.entries.get((n, w2))
            if tgt is None:
                continue
            e.t_action = [tgt.quotient.coords(self.times_t(z, e.term, tgt.term)) for z in e.reps]
        rep.cap_warnings = self.scheme.cap_hits()
        return rep

    def times_t(self, vec: dict, src: Term, dst: Term) -> dict:
        """Multiply a cochain by ``t`` (weight ``w -> w + wt(t)``)."""
        out = {}
        n_ord = self.ring.order
        for n, c in vec.items():
            b, k = src.locate(n)
            a, bb, (word, j) = b.space.keys[k]
            if j + 1 >= n_ord:
                continue
            tb = dst.by_key[b.key]
            out[tb.offset + tb.space.index[(a, bb, (word, j + 1))]] = c
        return out

    def euler_characteristic(self, window: Window) -> dict:
        return {w: sum((-1) ** (n % 2) * self.term(n, w).dim for n in self.degrees) for w in window.weights()}

    def hom_space(self, window: Window) -> "GradedHomSpace":
        """Degree-0 cocycles as collections ``{chart: matrix}`` (single-module targets)."""
        if list(self.X.terms) != [0]:
            raise ModuleError("hom_space needs a single module in degree 0")
        N = self.X.terms[0]
        out = GradedHomSpace(self.F, N)
        for w in window.weights():
            term = self.term(0, w)
            basis = []
            for z in linalg.kernel(self.differential(0, w), self.scheme.field.one):
                comps = term.vector_to_components(z)
                coll = {}
                for blk in term.blocks:
                    coll[blk.chart] = comps.get(blk.key, blk.space.to_matrix({}))
                basis.append(coll)
            out.basis[w] = basis
        return out


@dataclass
class GradedHomSpace:
    source: LocallyFreeModule
    target: LocallyFreeModule
    basis: dict = dc_field(default_factory=dict)  # weight -> [ {chart: matrix} ]

    def dims(self) -> dict:
        return {w: len(b) for w, b in self.basis.items()}

    @property
    def total_dim(self) -> int:
        return sum(len(b) for b in self.basis.values())

    def to_json(self) -> dict:
        S = self.source.scheme
        return {
            "dims": {format_weight(w): len(b) for w, b in sorted(self.basis.items())},
            "total_dim": self.total_dim,
            "basis": {format_weight(w): [{str(i): format_matrix(S.algebras[i], h[i]) for i in S.poset.elements}
                                         for h in b] for w, b in sorted(self.basis.items()) if b},
            "notes": ["window-relative result"],
        }


# ---------------------------------------------------------------------------
# reports


@dataclass
class CohomologyEntry:
    degree: int
    weight: tuple
    dim: int
    reps: list
    term: Term
    quotient: object
    t_action: list | None = None  # coords of t*rep in H at weight + wt(t)


@dataclass
class CohomologyReport:
    window: Window
    degrees: list
    t_weight: tuple
    order: int
    entries: dict = dc_field(default_factory=dict)
    cap_warnings: dict = dc_field(default_factory=dict)
    field: object = None

    def dim(self, n: int, w=None) -> int:
        if w is not None:
            e = self.entries.get((n, tuple(w)))
            return e.dim if e else 0
        return sum(e.dim for (m, _), e in self.entries.items() if m == n)

    def table(self) -> dict:
        return {(n, w): e.dim for (n, w), e in self.entries.items()}

    def totals(self) -> dict:
        return {n: self.dim(n) for n in self.degrees}

    def t_rank_pattern(self, n: int, w):
        """``(is_free, rank)`` of ``H^n_w`` as an R-module (meaningful when t has weight 0)."""
        e = self.entries[(n, tuple(w))]
        if any(self.t_weight) or e.t_action is None:
            return None
        mat = [[col.get(r, 0) for col in e.t_action] for r in range(e.dim)]
        return flat_rank_pattern(mat, self.order, field=self.field) if e.dim else (True, 0)

    def to_json(self, with_reps: bool = True) -> dict:
        rows = []
        for (n, w), e in sorted(self.entries.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            row = {"p": n, "weight": format_weight(w), "dim": e.dim}
            if e.t_action is not None:
                row["t_action"] = [[str(col.get(r, 0)) for col in e.t_action] for r in range(e.dim)]
            pat = self.t_rank_pattern(n, w) if e.dim else None
            if pat is not None:
                row["t_rank_pattern"] = {"free": pat[0], "rank": pat[1]}
            if with_reps and e.dim:
                row["representatives"] = [_format_cochain(e.term, z) for z in e.reps]
            rows.append(row)
        return {"window": str(self.window), "totals": {str(n): d for n, d in self.totals().items()},
                "entries": rows, "notes": ["window-relative result"]}


def _format_cochain(term: Term, vec: dict) -> list:
    out = []
    comps = term.vector_to_components(vec)
    for blk in term.blocks:
        if blk.key in comps:
            p, q, idx = blk.key
            out.append({"p": p, "q": q, "chain": list(idx),
                        "matrix": format_matrix(blk.space.A, comps[blk.key])})
    return out


def ext(F: LocallyFreeModule, N, window: Window, pmax: int | None = None, enumeration=None) -> CohomologyReport:
    """``Ext^p_A(F, N)`` per weight as ``H^p Hom_A(F, Č^•(N))`` (F locally free)."""
    H = HomComplex(F, N, enumeration)
    degrees = H.degrees if pmax is None else [n for n in H.degrees if n <= pmax]
    return H.cohomology(window, degrees)


def euler_characteristic(F: LocallyFreeModule, N, window: Window) -> dict:
    return HomComplex(F, N).euler_characteristic(window)


# ---------------------------------------------------------------------------
# the Čech resolution of a module itself


class CechComplex:
    """``Č^p(M) = (+)_{j_0<...<j_p} [M_{i(j_0) ∩ ... ∩ i(j_p)}]`` for ``0 <= p < d``.

    At chart ``i`` the term of a chain with meet ``m`` is ``M_m (x) A_{i∩m}``,
    written here in the basis of ``M_{i∩m}`` (via ``psi_{i∩m, m}``); in these
    bases the restriction from chain ``S`` to chain ``J`` is
    ``v -> Psi_{p_J p_S} phi_{p_J p_S}(v)`` and the augmentation is
    ``v -> Psi_{p i} phi_{p i}(v)``.
    """

    def __init__(self, M: LocallyFreeModule, enumeration=None, sign_mutation=None):
        self.module = M
        P = M.scheme.poset
        self.enumeration = tuple(enumeration) if enumeration is not None else P.elements
        self.d = len(P)
        self.chains = [enumerate_chains(P, p, self.enumeration) for p in range(self.d)]
        self.sign_mutation = sign_mutation

    def describe(self) -> list:
        """Per degree: the chains and the charts whose pushforwards appear."""
        return [[{"chain": list(c.indices), "charts": list(c.elements), "meet": c.meet} for c in chs]
                for chs in self.chains]

    def _space(self, chart, w) -> MatrixSpace:
        M = self.module
        zero = (0,) * M.scheme.rank
        return MatrixSpace(M.scheme.algebras[chart], M.shifts[chart], [zero], w)

    def local_complex(self, i, w):
        """Spaces and maps of ``0 -> M_i -> Č^0_i -> ... -> Č^{d-1}_i -> 0`` at weight ``w``."""
        M = self.module
        S = M.scheme
        P = S.poset
        one = S.field.one
        terms = []
        aug = Term([Block(("aug",), i, self._space(i, w), 0)])
        terms.append(aug)
        for p in range(self.d):
            blocks, off = [], 0
            for ch in self.chains[p]:
                c = P.meet(i, ch.meet)
                sp = self._space(c, w)
                blocks.append(Block((p, ch.indices), c, sp, off))
                off += len(sp)
            terms.append(Term(blocks))
        maps = []
        # augmentation
        cols = []
        for k, (a, _, key) in enumerate(aug.blocks[0].space.keys):
            col = {}
            for blk in terms[1].blocks:
                img = self._transfer(blk.chart, i, a, key)
                _add_matrix(col, blk, img, one)
            cols.append(col)
        maps.append(cols)
        for p in range(self.d - 1):
            src, dst = terms[p + 1], terms[p + 2]
            cols = []
            for blk in src.blocks:
                _, idx = blk.key
                for (a, _, key) in blk.space.keys:
                    col = {}
                    for x in range(1, self.d + 1):
                        if x in idx:
                            continue
                        J = tuple(sorted(idx + (x,)))
                        k = J.index(x)
                        sign = -one if k % 2 else one
                        if self.sign_mutation == (p, k):
                            sign = -sign
                        tb = dst.by_key[(p + 1, J)]
                        _add_matrix(col, tb, self._transfer(tb.chart, blk.chart, a, key), sign)
                    cols.append(col)
            maps.append(cols)
        return terms, maps

    def _transfer(self, q, s, a, key):
        """``Psi_qs phi_qs(e_a * key)`` as a column matrix over ``A_q``."""
        M = self.module
        S = M.scheme
        A = S.algebras[q]
        u = S.phi(q, s).apply({key: S.field.one})
        psi = M.psi(q, s)
        return [[A.mul(psi[a2][a], u) if psi[a2][a] else {}] for a2 in range(M.rank)]

    def dd_failures(self, window: Window) -> list:
        bad = []
        for i in self.module.scheme.poset.elements:
            for w in window.weights():
                _, maps = self.local_complex(i, w)
                for n in range(len(maps) - 1):
                    for j, col in enumerate(maps[n]):
                        if linalg.apply(maps[n + 1], col):
                            bad.append({"chart": i, "weight": format_weight(w), "position": n})
                            break
        return bad


def build_cech(M: LocallyFreeModule, enumeration=None, window: Window | None = None) -> CechComplex:
    """Build the complex; with a window, ``d∘d = 0`` is verified there (raises otherwise)."""
    C = CechComplex(M, enumeration)
    if window is not None:
        bad = C.dd_failures(window)
        if bad:
            raise ModuleError("d∘d != 0 in the Čech complex: %s" % bad[:3])
    return C


@dataclass
class ExactnessReport:
    failures: list = dc_field(default_factory=list)
    checked: int = 0
    euler_failures: list = dc_field(default_factory=list)

    @property
    def exact(self) -> bool:
        return not self.failures and not self.euler_failures

    def to_json(self) -> dict:
        return {"exact": self.exact, "checked_positions": self.checked,
                "failures": self.failures, "euler_failures": self.euler_failures}


def resolution_exactness_check(C: CechComplex, window: Window) -> ExactnessReport:
    """Rank computation at every position of the augmented complex, every chart and weight."""
    rep = ExactnessReport()
    for i in C.module.scheme.poset.elements:
        for w in window.weights():
            terms, maps = C.local_complex(i, w)
            ranks = [linalg.rank(cols) for cols in maps]
            dims = [t.dim for t in terms]
            chi = sum((-1) ** k * d for k, d in enumerate(dims))
            if chi != 0:
                rep.euler_failures.append({"chart": i, "weight": format_weight(w), "euler": chi})
            for pos in range(len(terms)):
                ker = dims[pos] - (ranks[pos] if pos < len(maps) else 0)
                im = ranks[pos - 1] if pos > 0 else 0
                rep.checked += 1
                if ker != im:
                    rep.failures.append({"chart": i, "weight": format_weight(w), "position": pos - 1,
                                         "dim_ker": ker, "dim_im": im})
    return rep
