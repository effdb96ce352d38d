"""Locally free right modules on an NC scheme, pushforwards ``[M_s]`` and restriction maps.

A locally free module of rank ``r`` has ``M_i = A_i^r`` with basis ``e^i_a``
and gluing isomorphisms ``psi_ij: M_j (x) A_i -> M_i`` for ``i < j``, stored as
``r x r`` matrices over ``A_i``: ``psi_ij(e^j_b (x) 1) = sum_a e^i_a * Psi_ij[a][b]``.
Right-module maps between free modules act on coordinate columns by left
multiplication with a matrix.

Grading: ``shifts[i][a]`` is a twist, ``M_i = (+)_a A_i(shifts[i][a])``; the
basis vector ``e^i_a`` sits in weight ``-shifts[i][a]`` and ``Psi_ij[a][b]`` is
homogeneous of weight ``shifts[i][a] - shifts[j][b]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .coeff import Window, wadd, wsub, format_weight
from .algebra import (GradedAlgebra, add_into, identity_matrix, invert_matrix, matrix_mul,
                      matrix_apply_hom)
from .scheme import NcScheme
from . import linalg


class ModuleError(ValueError):
    pass


def parse_matrix(A: GradedAlgebra, rows) -> list:
    """Entries may be strings, raw combinations, or plain rational scalars."""
    return [[A.parse(e) if isinstance(e, str) else
             A.nf(e) if isinstance(e, dict) else
             ({("", 0): A.field(e)} if e else {}) for e in row] for row in rows]


def format_matrix(A: GradedAlgebra, M) -> list:
    return [[A.format(e) for e in row] for row in M]


def zero_matrix(r: int, c: int) -> list:
    return [[{} for _ in range(c)] for _ in range(r)]


def scalar_matrix(M, c) -> list:
    return [[{k: c * v for k, v in e.items()} for e in row] for row in M]


def matrix_add(X, Y) -> list:
    return [[add_into(dict(a), b) for a, b in zip(ra, rb)] for ra, rb in zip(X, Y)]


def matrix_times_t(A: GradedAlgebra, X, k: int) -> list:
    return [[A.times_t(e, k) for e in row] for row in X]


class LocallyFreeModule:
    def __init__(self, name: str, scheme: NcScheme, rank: int, shifts: dict, gluings: dict):
        self.name = name
        self.scheme = scheme
        self.rank = rank
        P = scheme.poset
        self.shifts = {}
        for i in P.elements:
            sh = shifts.get(i)
            if sh is None or len(sh) != rank:
                raise ModuleError("module %s: chart %s needs %d shifts" % (name, i, rank))
            self.shifts[i] = [tuple(w) if not isinstance(w, int) else (w,) for w in sh]
            for w in self.shifts[i]:
                if len(w) != scheme.rank:
                    raise ModuleError("module %s: shift %s has the wrong number of components" % (name, w))
        self.gluings = {}
        for (i, j) in P.relations():
            if (i, j) not in gluings:
                raise ModuleError("module %s: missing gluing psi_%s%s" % (name, i, j))
            M = gluings[(i, j)]
            if len(M) != rank or any(len(row) != rank for row in M):
                raise ModuleError("module %s: psi_%s%s must be %dx%d" % (name, i, j, rank, rank))
            self.gluings[(i, j)] = parse_matrix(scheme.algebras[i], M)
        for key in gluings:
            if key not in self.gluings:
                raise ModuleError("module %s: gluing psi_%s%s for a non-relation" % (name, key[0], key[1]))
        self._inverses = {}

    def __repr__(self):
        return "LocallyFreeModule(%s, rank=%d)" % (self.name, self.rank)

    @property
    def ring(self):
        return self.scheme.ring

    def psi(self, i, j) -> list:
        if i == j:
            return identity_matrix(self.scheme.algebras[i], self.rank)
        return self.gluings[(i, j)]

    def inverse_weights(self, i, j) -> list:
        return [[wsub(self.shifts[j][b], self.shifts[i][a]) for a in range(self.rank)]
                for b in range(self.rank)]

    def psi_inv(self, i, j, search: Window | None = None):
        """Two-sided inverse of ``Psi_ij`` over ``A_i`` (``None`` if none is found in the window)."""
        if i == j:
            return identity_matrix(self.scheme.algebras[i], self.rank)
        key = (i, j)
        if key not in self._inverses:
            A = self.scheme.algebras[i]
            if self.entry_weight_errors(i, j):
                if search is None:
                    return None
                inv = invert_matrix(A, self.gluings[key], search_weights=search.weights())
            else:
                inv = invert_matrix(A, self.gluings[key], weights_of_inverse=self.inverse_weights(i, j))
            self._inverses[key] = inv
        return self._inverses[key]

    def entry_weight_errors(self, i, j) -> list:
        A = self.scheme.algebras[i]
        out = []
        for a in range(self.rank):
            for b in range(self.rank):
                e = self.gluings[(i, j)][a][b]
                want = wsub(self.shifts[i][a], self.shifts[j][b])
                if e and not A.is_homogeneous_of(e, want):
                    out.append((a, b))
        return out

    def format_gluings(self) -> dict:
        return {"%s,%s" % (i, j): format_matrix(self.scheme.algebras[i], M)
                for (i, j), M in sorted(self.gluings.items(), key=lambda kv: self._key(kv[0]))}

    def _key(self, pair):
        P = self.scheme.poset
        return (P.position(pair[0]), P.position(pair[1]))

    def to_json(self) -> dict:
        return {
            "name": self.name, "rank": self.rank, "order": self.ring.order,
            "shifts": {str(i): [format_weight(w) for w in self.shifts[i]] for i in self.scheme.poset.elements},
            "gluings": self.format_gluings(),
        }


# ---------------------------------------------------------------------------
# constructions


def structure_module(scheme: NcScheme, name: str = "O") -> LocallyFreeModule:
    zero = (0,) * scheme.rank
    return LocallyFreeModule(name, scheme, 1, {i: [zero] for i in scheme.poset.elements},
                             {(i, j): [[scheme.algebras[i].one()]] for (i, j) in scheme.poset.relations()})


def direct_sum(mods, name: str | None = None) -> LocallyFreeModule:
    mods = list(mods)
    S = mods[0].scheme
    if any(m.scheme is not S for m in mods):
        raise ModuleError("direct sum of modules on different schemes")
    r = sum(m.rank for m in mods)
    shifts = {i: [w for m in mods for w in m.shifts[i]] for i in S.poset.elements}
    gl = {}
    for (i, j) in S.poset.relations():
        M = zero_matrix(r, r)
        off = 0
        for m in mods:
            for a in range(m.rank):
                for b in range(m.rank):
                    M[off + a][off + b] = m.gluings[(i, j)][a][b]
            off += m.rank
        gl[(i, j)] = M
    return LocallyFreeModule(name or "+".join(m.name for m in mods), S, r, shifts, gl)


def twist(M: LocallyFreeModule, offset, name: str | None = None) -> LocallyFreeModule:
    """Add ``offset`` to every shift on every chart (a global grading twist).

    Basis vectors have degree ``-shift``, so homogeneous elements of the
    twisted module sit ``offset`` lower than before.
    """
    offset = tuple(offset)
    return LocallyFreeModule(name or "%s{%s}" % (M.name, format_weight(offset)), M.scheme, M.rank,
                             {i: [wadd(w, offset) for w in M.shifts[i]] for i in M.shifts},
                             M.gluings)


def transport(M: LocallyFreeModule, scheme: NcScheme, name: str | None = None) -> LocallyFreeModule:
    """Re-read the gluing matrices over another realization of the same presentation.

    Going to a lower order truncates (``reduce_scalar``); going to a higher order
    keeps the coefficients (``canonical_lift``).
    """
    n = scheme.ring.order
    gl = {key: [[{k: c for k, c in e.items() if k[1] < n} for e in row] for row in mat]
          for key, mat in M.gluings.items()}
    return LocallyFreeModule(name or M.name, scheme, M.rank, M.shifts, gl)


# ---------------------------------------------------------------------------
# validation


@dataclass
class ModuleReport:
    homogeneity_failures: list = dc_field(default_factory=list)
    invertibility_failures: list = dc_field(default_factory=list)
    cocycle_failures: list = dc_field(default_factory=list)
    notes: tuple = ("window-relative result",)

    @property
    def valid(self) -> bool:
        return not (self.homogeneity_failures or self.invertibility_failures or self.cocycle_failures)

    def to_json(self) -> dict:
        return {"valid": self.valid, "homogeneity_failures": self.homogeneity_failures,
                "invertibility_failures": self.invertibility_failures,
                "cocycle_failures": self.cocycle_failures, "notes": list(self.notes)}


def validate_module(M: LocallyFreeModule, window: Window) -> ModuleReport:
    S = M.scheme
    rep = ModuleReport()
    for (i, j) in S.poset.relations():
        bad = M.entry_weight_errors(i, j)
        for a, b in bad:
            rep.homogeneity_failures.append({
                "gluing": [i, j], "entry": [a, b],
                "value": S.algebras[i].format(M.gluings[(i, j)][a][b]),
                "expected_weight": format_weight(wsub(M.shifts[i][a], M.shifts[j][b]))})
        if M.psi_inv(i, j, search=window) is None:
            rep.invertibility_failures.append({
                "gluing": [i, j], "matrix": format_matrix(S.algebras[i], M.gluings[(i, j)])})
    for (i, j, k) in S.poset.order_chains(2):
        A = S.algebras[i]
        lhs = matrix_mul(A, M.psi(i, j), matrix_apply_hom(S.phi(i, j), M.psi(j, k)))
        if lhs != M.psi(i, k):
            rep.cocycle_failures.append({"chain": [i, j, k], "composite": format_matrix(A, lhs),
                                         "direct": format_matrix(A, M.psi(i, k))})
    return rep


# ---------------------------------------------------------------------------
# module maps


class ModuleMap:
    """``h: M -> N`` given by matrices ``H_i`` over ``A_i`` (``v -> H_i v`` on coordinates)."""

    def __init__(self, source: LocallyFreeModule, target: LocallyFreeModule, components: dict):
        if source.scheme is not target.scheme:
            raise ModuleError("module map between different schemes")
        self.source, self.target = source, target
        S = source.scheme
        self.components = {}
        for i in S.poset.elements:
            if i not in components:
                raise ModuleError("module map: missing component at chart %s" % i)
            H = components[i]
            if len(H) != target.rank or any(len(row) != source.rank for row in H):
                raise ModuleError("module map component at %s must be %dx%d"
                                  % (i, target.rank, source.rank))
            self.components[i] = parse_matrix(S.algebras[i], H)

    def compatibility_failures(self) -> list:
        """Charts pairs where ``H_i Psi^M_ij != Psi^N_ij phi_ij(H_j)``."""
        S = self.source.scheme
        out = []
        for (i, j) in S.poset.relations():
            A = S.algebras[i]
            lhs = matrix_mul(A, self.components[i], self.source.psi(i, j))
            rhs = matrix_mul(A, self.target.psi(i, j), matrix_apply_hom(S.phi(i, j), self.components[j]))
            if lhs != rhs:
                out.append([i, j])
        return out

    def weight_failures(self) -> list:
        S = self.source.scheme
        out = []
        for i, H in self.components.items():
            for a in range(self.target.rank):
                for b in range(self.source.rank):
                    want = wsub(self.target.shifts[i][a], self.source.shifts[i][b])
                    if H[a][b] and not S.algebras[i].is_homogeneous_of(H[a][b], want):
                        out.append([i, a, b])
        return out


# ---------------------------------------------------------------------------
# pushforward [M_s] and restriction r_s


@dataclass
class PushforwardModule:
    """``[M_s]``: at chart ``i`` the component is ``M_s (x) A_p`` with ``p = i ∩ s``.

    Its basis at every chart is ``e^s_a (x) 1``, so the components are free
    ``A_p``-modules of rank ``r`` with the shifts of ``M_s``, and all gluing maps
    ``psi^{[M_s]}_ij`` are identity matrices in these bases (the formula
    ``m (x) a_q (x) a_i -> m (x) phi_pq(a_q) phi_pi(a_i)`` fixes ``e^s_a (x) 1 (x) 1``).
    """

    module: LocallyFreeModule
    origin: object

    def chart(self, i):
        return self.module.scheme.poset.meet(i, self.origin)

    def component(self, i) -> tuple:
        """``(p, rank, shifts)`` describing ``[M_s]_i`` as a free ``A_p``-module."""
        return self.chart(i), self.module.rank, self.module.shifts[self.origin]

    def gluing(self, i, j) -> list:
        return identity_matrix(self.module.scheme.algebras[self.chart(i)], self.module.rank)


def pushforward(M: LocallyFreeModule, s) -> PushforwardModule:
    if s not in M.scheme.poset.elements:
        raise ModuleError("unknown chart %r" % (s,))
    return PushforwardModule(M, s)


@dataclass
class RestrictionMap:
    """``r_s: M -> [M_s]``; at chart ``i`` it sends a coordinate column ``v`` over ``A_i``
    to ``R_i phi_{p i}(v)`` in the basis of ``M_s (x) A_p``, ``p = i ∩ s``."""

    module: LocallyFreeModule
    origin: object
    matrices: dict  # i -> (p, R_i)


def restriction(M: LocallyFreeModule, s) -> RestrictionMap:
    """``m_i -> psi_{p i}(m_i (x) 1)``, re-expressed in ``M_s (x) A_p`` via ``psi_{p s}^{-1}``."""
    S = M.scheme
    mats = {}
    for i in S.poset.elements:
        p = S.poset.meet(i, s)
        A = S.algebras[p]
        inv = M.psi_inv(p, s)
        if inv is None:
            raise ModuleError("psi_%s%s is not invertible in the window" % (p, s))
        mats[i] = (p, matrix_mul(A, inv, M.psi(p, i)))
    return RestrictionMap(M, s, mats)


def pushforward_map(M: LocallyFreeModule, s, H, i) -> tuple:
    """Component at chart ``i`` of ``[h_s]`` for an ``A_s``-linear map ``h_s`` with matrix ``H``."""
    S = M.scheme
    p = S.poset.meet(i, s)
    return p, matrix_apply_hom(S.phi(p, s), H)


# ---------------------------------------------------------------------------
# graded bases of matrix spaces (shared with cech/deform)


class MatrixSpace:
    """k-basis of ``r_out x r_in`` matrices over ``A`` whose ``(a, b)`` entry has weight
    ``base + out_shifts[a] - in_shifts[b]``."""

    def __init__(self, A: GradedAlgebra, out_shifts, in_shifts, base):
        self.A = A
        self.keys = []
        for a, sa in enumerate(out_shifts):
            for b, sb in enumerate(in_shifts):
                for key in A.graded_basis(wsub(wadd(tuple(base), sa), sb)):
                    self.keys.append((a, b, key))
        self.index = {k: n for n, k in enumerate(self.keys)}
        self.shape = (len(out_shifts), len(in_shifts))

    def __len__(self):
        return len(self.keys)

    def matrix(self, n: int, coeff) -> list:
        a, b, key = self.keys[n]
        M = zero_matrix(*self.shape)
        M[a][b] = {key: coeff}
        return M

    def to_matrix(self, vec: dict) -> list:
        M = zero_matrix(*self.shape)
        for n, c in vec.items():
            a, b, key = self.keys[n]
            add_into(M[a][b], {key: c})
        return M

    def coords(self, M) -> dict:
        """Coordinates of a matrix in this basis; raises if an entry leaves the space."""
        out = {}
        for a, row in enumerate(M):
            for b, e in enumerate(row):
                for key, c in e.items():
                    n = self.index.get((a, b, key))
                    if n is None:
                        raise ModuleError("matrix entry (%d,%d) term %s lies outside the graded piece"
                                          % (a, b, self.A.format({key: c})))
                    out[n] = c
        return out


def hom_to_pushforward_dim(M: LocallyFreeModule, N: LocallyFreeModule, s, weight) -> int:
    """``dim_k Hom_A(M, [N_s])_w``, solved directly from the gluing compatibilities.

    Unknowns: ``H_i`` over ``A_{p_i}`` (``p_i = i ∩ s``); equations for ``i < j``:
    ``H_i phi_{p_i i}(Psi^M_ij) = phi_{p_i p_j}(H_j)``.
    """
    S = M.scheme
    P = S.poset
    field = S.field
    spaces = {}
    offset = {}
    total = 0
    for i in P.elements:
        p = P.meet(i, s)
        sp = MatrixSpace(S.algebras[p], N.shifts[s], M.shifts[i], weight)
        spaces[i] = (p, sp)
        offset[i] = total
        total += len(sp)
    columns = [dict() for _ in range(total)]
    eq = {}
    for (i, j) in P.relations():
        pi, spi = spaces[i]
        pj, spj = spaces[j]
        A = S.algebras[pi]
        psi_img = matrix_apply_hom(S.phi(pi, i), M.psi(i, j))
        for n in range(len(spi)):
            prod = matrix_mul(A, spi.matrix(n, field.one), psi_img)
            _scatter(columns[offset[i] + n], eq, (i, j), prod, field.one)
        for n in range(len(spj)):
            img = matrix_apply_hom(S.phi(pi, pj), spj.matrix(n, field.one))
            _scatter(columns[offset[j] + n], eq, (i, j), img, -field.one)
    return len(linalg.kernel(columns))


def _scatter(col: dict, eq_index: dict, tag, mat, sign):
    for a, row in enumerate(mat):
        for b, e in enumerate(row):
            for key, c in e.items():
                idx = eq_index.setdefault((tag, a, b, key), len(eq_index))
                v = col.get(idx)
                v = sign * c if v is None else v + sign * c
                if v:
                    col[idx] = v
                else:
                    col.pop(idx, None)


def local_hom_dim(M: LocallyFreeModule, N: LocallyFreeModule, s, weight) -> int:
    """``dim_k Hom_{A_s}(M_s, N_s)_w``."""
    return len(MatrixSpace(M.scheme.algebras[s], N.shifts[s], M.shifts[s], weight))


def adjunction_check(M: LocallyFreeModule, N: LocallyFreeModule, window: Window) -> list:
    """Weights and charts where ``Hom_A(M, [N_s]) != Hom_{A_s}(M_s, N_s)`` dimensionally."""
    bad = []
    for s in M.scheme.poset.elements:
        for w in window.weights():
            a, b = hom_to_pushforward_dim(M, N, s, w), local_hom_dim(M, N, s, w)
            if a != b:
                bad.append({"chart": s, "weight": format_weight(w), "global": a, "local": b})
    return bad


def graded_hom(M: LocallyFreeModule, N: LocallyFreeModule, window: Window):
    """Global homomorphisms ``M -> N`` per weight, as degree-0 cocycles of the Hom-Čech complex."""
    from .cech import HomComplex

    return HomComplex(M, N).hom_space(window)
