"""Extending locally free modules along a deformation tower.

Everything is phrased in the poset-chain cochain complex of ``End(F⁰)``: a
``p``-cochain assigns to each order chain ``i_0 < ... < i_p`` a matrix over
``A⁰_{i_0}`` whose ``(a, b)`` entry has weight ``w + shift_{i_0}[a] - shift_{i_p}[b]``.
The differential is

    (dc)_{i_0..i_{p+1}} = Psi_{i_0 i_1} phi(c_{i_1..i_{p+1}})
                          + sum_{k=1..p} (-1)^k c_{..î_k..}
                          + (-1)^{p+1} c_{i_0..i_p} phi(Psi_{i_p i_{p+1}}),

so ``(dε)_{ijk} = Psi_ij ε_jk - ε_ik + ε_ij Psi_jk`` and the closedness identity
for a 2-cochain is ``(dδ)_{ijkl} = 0``.

Going from level ``n`` (``k[t]/t^n``) to ``n + 1``, the kernel ``J = (t^n)`` is
identified with the base field, so ``t^n A'_i = A⁰_i`` and every correction
lives at cochain weight ``-n * wt(t)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field

from .algebra import add_into, matrix_apply_hom, matrix_mul
from .coeff import Window, format_weight, wadd, wscale
from .qcoh import (LocallyFreeModule, MatrixSpace, ModuleError, format_matrix, matrix_add,
                   scalar_matrix, transport, validate_module, zero_matrix)
from .scheme import DeformationTower, NcScheme
from . import linalg


def _is_zero(M) -> bool:
    return not any(e for row in M for e in row)


# ---------------------------------------------------------------------------
# the chain cochain complex of End(F)


class EndChainComplex:
    """Poset-chain cochains of ``End(F)`` for a locally free ``F`` (any level)."""

    def __init__(self, F: LocallyFreeModule):
        self.F = F
        self.scheme = F.scheme
        P = self.scheme.poset
        self.chains = {}
        p = 0
        while True:
            ch = P.order_chains(p)
            if not ch:
                break
            self.chains[p] = ch
            p += 1
        self.max_p = p - 1
        self._spaces = {}
        self._diff = {}

    def chains_of(self, p: int) -> list:
        return self.chains.get(p, [])

    def space(self, p: int, w):
        """``[(chain, MatrixSpace, offset)]`` and the total dimension."""
        key = (p, tuple(w))
        got = self._spaces.get(key)
        if got is None:
            blocks, off = [], 0
            for ch in self.chains_of(p):
                sp = MatrixSpace(self.scheme.algebras[ch[0]], self.F.shifts[ch[0]], self.F.shifts[ch[-1]], w)
                blocks.append((ch, sp, off))
                off += len(sp)
            got = self._spaces[key] = (blocks, off)
        return got

    def d(self, p: int, c: dict) -> dict:
        """Apply the differential to a ``p``-cochain ``{chain: matrix}``."""
        S, F = self.scheme, self.F
        one = S.field.one
        out = {}
        for J in self.chains_of(p + 1):
            i0 = J[0]
            A = S.algebras[i0]
            total = zero_matrix(F.rank, F.rank)
            first = c.get(J[1:])
            if first is not None:
                total = matrix_add(total, matrix_mul(A, F.psi(i0, J[1]), matrix_apply_hom(S.phi(i0, J[1]), first)))
            for k in range(1, p + 1):
                face = c.get(J[:k] + J[k + 1:])
                if face is not None:
                    total = matrix_add(total, scalar_matrix(face, one if k % 2 == 0 else -one))
            last = c.get(J[:-1])
            if last is not None:
                prod = matrix_mul(A, last, matrix_apply_hom(S.phi(i0, J[-2]), F.psi(J[-2], J[-1])))
                total = matrix_add(total, scalar_matrix(prod, one if (p + 1) % 2 == 0 else -one))
            if not _is_zero(total):
                out[J] = total
        return out

    def to_vector(self, p: int, w, c: dict) -> dict:
        blocks, _ = self.space(p, w)
        vec = {}
        for ch, sp, off in blocks:
            if ch in c:
                for n, v in sp.coords(c[ch]).items():
                    vec[off + n] = v
        return vec

    def from_vector(self, p: int, w, vec: dict) -> dict:
        blocks, _ = self.space(p, w)
        out = {}
        for ch, sp, off in blocks:
            part = {n - off: v for n, v in vec.items() if off <= n < off + len(sp)}
            if part:
                out[ch] = sp.to_matrix(part)
        return out

    def differential(self, p: int, w) -> list:
        key = (p, tuple(w))
        if key not in self._diff:
            one = self.scheme.field.one
            blocks, _ = self.space(p, w)
            cols = []
            for ch, sp, off in blocks:
                for n in range(len(sp)):
                    cols.append(self.to_vector(p + 1, w, self.d(p, {ch: sp.matrix(n, one)})))
            self._diff[key] = cols
        return self._diff[key]

    def cocycles(self, p: int, w) -> list:
        return linalg.kernel(self.differential(p, w), self.scheme.field.one)

    def coboundaries(self, p: int, w) -> list:
        return self.differential(p - 1, w) if p > 0 else []

    def cohomology(self, p: int, w) -> linalg.Quotient:
        return linalg.Quotient(self.cocycles(p, w), self.coboundaries(p, w))

    def dims(self, window: Window) -> dict:
        """``{p: total dim H^p over the window}``."""
        return {p: sum(self.cohomology(p, w).dim for w in window.weights()) for p in range(self.max_p + 1)}

    def dd_failures(self, w) -> list:
        bad = []
        for p in range(self.max_p - 1):
            d2 = self.differential(p + 1, w)
            for j, col in enumerate(self.differential(p, w)):
                if linalg.apply(d2, col):
                    bad.append({"p": p, "weight": format_weight(w), "column": j})
                    break
        return bad

    def format_cochain(self, c: dict) -> dict:
        S = self.scheme
        return {",".join(ch): format_matrix(S.algebras[ch[0]], M) for ch, M in sorted(c.items())}


# ---------------------------------------------------------------------------
# lifting and the obstruction cocycle


def lift_gluing(F: LocallyFreeModule, target: NcScheme) -> LocallyFreeModule:
    """Coefficientwise lift of every gluing matrix to the next level."""
    if target.ring.order != F.ring.order + 1:
        raise ModuleError("lift_gluing goes up exactly one level")
    return transport(F, target)


def _split_top(A_hi, A0, M, n: int, what: str):
    """Write a matrix over ``A'`` with entries in ``t^n A'`` as a matrix over ``A⁰``."""
    out = zero_matrix(len(M), len(M[0]) if M else 0)
    for a, row in enumerate(M):
        for b, e in enumerate(row):
            for (word, j), c in e.items():
                if j != n:
                    raise ModuleError("%s: entry (%d,%d) has a t^%d term; lifts do not reduce correctly"
                                      % (what, a, b, j))
                add_into(out[a][b], {(word, 0): c})
    return out


def _embed_top(A_hi, M0, n: int):
    """``t^n * M0`` as a matrix over ``A'`` (M0 over ``A⁰``)."""
    return [[{(word, n): c for (word, j), c in e.items()} for e in row] for row in M0]


def reduction_failures(lift: LocallyFreeModule, F: LocallyFreeModule) -> list:
    """Gluings whose truncation to ``F``'s order differs from ``F``."""
    n = F.ring.order
    bad = []
    for key, M in lift.gluings.items():
        red = [[{k: c for k, c in e.items() if k[1] < n} for e in row] for row in M]
        if red != F.gluings[key]:
            bad.append(list(key))
    return bad


@dataclass
class ObstructionResult:
    level: int  # F lives over k[t]/t^level; the extension goes to level + 1
    weight: tuple
    cocycle: dict  # 2-cochain over A⁰ ({chain: matrix})
    closed: bool
    solvable: bool | None = None
    particular_solution: dict | None = None  # 1-cochain
    h1_basis: list = dc_field(default_factory=list)
    h2_certificate: dict | None = None
    rank_report: dict = dc_field(default_factory=dict)

    def to_json(self, cx: EndChainComplex) -> dict:
        out = {"level": self.level, "weight": format_weight(self.weight),
               "cocycle": cx.format_cochain(self.cocycle), "cocycle_is_zero": not self.cocycle,
               "closed": self.closed, "solvable": self.solvable, "rank_report": self.rank_report,
               "dim_h1": len(self.h1_basis)}
        if self.particular_solution is not None:
            out["particular_solution"] = cx.format_cochain(self.particular_solution)
        out["h1_basis"] = [cx.format_cochain(c) for c in self.h1_basis]
        if self.h2_certificate is not None:
            out["h2_certificate"] = self.h2_certificate
        return out


def obstruction_cocycle(F: LocallyFreeModule, lift: LocallyFreeModule, F0: LocallyFreeModule) -> dict:
    """``δ_ijk = Psi'_ij phi(Psi'_jk) - Psi'_ik`` divided by ``t^n``, over ``A⁰_i``."""
    n = F.ring.order
    S1 = lift.scheme
    S0 = F0.scheme
    if reduction_failures(lift, F):
        raise ModuleError("the supplied lift does not reduce to F")
    delta = {}
    for (i, j, k) in S1.poset.order_chains(2):
        A = S1.algebras[i]
        comp = matrix_mul(A, lift.psi(i, j), matrix_apply_hom(S1.phi(i, j), lift.psi(j, k)))
        diff = [[add_into(dict(x), y, -S1.field.one) for x, y in zip(r1, r2)]
                for r1, r2 in zip(comp, lift.psi(i, k))]
        D = _split_top(A, S0.algebras[i], diff, n, "delta_%s%s%s" % (i, j, k))
        if not _is_zero(D):
            delta[(i, j, k)] = D
    return delta


def obstruction(F: LocallyFreeModule, target: NcScheme, F0: LocallyFreeModule,
                lift: LocallyFreeModule | None = None) -> tuple:
    """``(ObstructionResult, lift, complex)`` for extending ``F`` (level n) to ``target`` (level n+1)."""
    lift = lift if lift is not None else lift_gluing(F, target)
    n = F.ring.order
    cx = EndChainComplex(F0)
    w = wscale(-n, target.ring.t_weight)
    delta = obstruction_cocycle(F, lift, F0)
    closed = not cx.d(2, delta)
    return ObstructionResult(level=n, weight=w, cocycle=delta, closed=closed), lift, cx


def solve_extension(res: ObstructionResult, cx: EndChainComplex, lift: LocallyFreeModule):
    """Solve ``dε = -δ``; returns the updated result and an ``ExtensionCertificate`` or ``None``."""
    w = res.weight
    n = res.level
    field = cx.scheme.field
    cols = cx.differential(1, w)
    target = {k: -v for k, v in cx.to_vector(2, w, res.cocycle).items()}
    r_d1 = linalg.rank(cols)
    r_aug = linalg.rank(cols + [target]) if target else r_d1
    H1 = cx.cohomology(1, w)
    res.h1_basis = [cx.from_vector(1, w, z) for z in H1.reps]
    res.rank_report = {"rank_d1": r_d1, "rank_augmented": r_aug,
                       "dim_cochains_1": cx.space(1, w)[1], "dim_cochains_2": cx.space(2, w)[1],
                       "dim_cocycles_1": len(cx.cocycles(1, w)),
                       "dim_coboundaries_1": linalg.rank(cx.coboundaries(1, w))}
    if r_aug > r_d1:
        res.solvable = False
        res.h2_certificate = h2_certificate(cx, w, res.cocycle)
        return res, None
    sol = linalg.solve(cols, target) if target else {}
    eps = cx.from_vector(1, w, sol)
    res.solvable = True
    res.particular_solution = eps
    return res, apply_correction(lift, eps, n)


def h2_certificate(cx: EndChainComplex, w, delta: dict) -> dict:
    """A functional ``λ`` on 2-cochains that kills ``im d¹`` but not ``δ``."""
    cols = cx.differential(1, w)
    _, dim2 = cx.space(2, w)
    rows = [dict() for _ in range(dim2)]
    for j, col in enumerate(cols):
        for r, v in col.items():
            rows[r][j] = v
    vec = cx.to_vector(2, w, delta)
    for lam in linalg.kernel(rows, cx.scheme.field.one):
        val = sum((lam.get(r, 0) * v for r, v in vec.items()), cx.scheme.field.zero)
        if val:
            fmt = cx.scheme.field.format
            return {"functional": {str(k): fmt(v) for k, v in sorted(lam.items())},
                    "value_on_cocycle": fmt(val),
                    "kills_image_of_d1": all(not sum((lam.get(r, 0) * v for r, v in col.items()),
                                                     cx.scheme.field.zero) for col in cols)}
    raise ModuleError("no separating functional found although δ is not a coboundary")


def apply_correction(lift: LocallyFreeModule, eps: dict, n: int) -> "ExtensionCertificate":
    """``Psi'' = Psi' + t^n ε`` and the exact re-verification over ``A'``."""
    S = lift.scheme
    gl = {}
    for key, M in lift.gluings.items():
        e = eps.get(key)
        gl[key] = matrix_add(M, _embed_top(S.algebras[key[0]], e, n)) if e is not None else M
    Fp = LocallyFreeModule(lift.name, S, lift.rank, lift.shifts, gl)
    return ExtensionCertificate(Fp, n)


@dataclass
class ExtensionCertificate:
    module: LocallyFreeModule
    base_order: int
    cocycle_ok: bool | None = None
    reduction_ok: bool | None = None

    def verify(self, F: LocallyFreeModule) -> "ExtensionCertificate":
        M = self.module
        S = M.scheme
        ok = True
        for (i, j, k) in S.poset.order_chains(2):
            A = S.algebras[i]
            if matrix_mul(A, M.psi(i, j), matrix_apply_hom(S.phi(i, j), M.psi(j, k))) != M.psi(i, k):
                ok = False
                break
        self.cocycle_ok = ok
        self.reduction_ok = not reduction_failures(M, F)
        return self

    @property
    def valid(self) -> bool:
        return bool(self.cocycle_ok and self.reduction_ok)

    def to_json(self) -> dict:
        return {"order": self.module.ring.order, "cocycle_ok": self.cocycle_ok,
                "reduction_ok": self.reduction_ok, "module": self.module.to_json()}


# ---------------------------------------------------------------------------
# torsor structure and isomorphisms


@dataclass
class TorsorReport:
    weight: tuple
    dim_h1: int
    dim_cocycles: int
    dim_coboundaries: int
    action_ok: bool
    differences_closed: bool

    @property
    def dimension_identity(self) -> bool:
        return self.dim_cocycles == self.dim_coboundaries + self.dim_h1

    def to_json(self) -> dict:
        return {"weight": format_weight(self.weight), "dim_h1": self.dim_h1,
                "dim_solution_space": self.dim_cocycles, "dim_coboundaries": self.dim_coboundaries,
                "dimension_identity": self.dimension_identity, "action_ok": self.action_ok,
                "differences_closed": self.differences_closed,
                "isomorphism_classes": "affine space of dimension %d" % self.dim_h1}


def torsor_structure(res: ObstructionResult, cx: EndChainComplex) -> TorsorReport:
    """Solutions of ``dε = -δ`` form ``ε₀ + Z¹``; classes up to ``(1 + t^n γ)`` form ``H¹``."""
    w = res.weight
    cols = cx.differential(1, w)
    Z = cx.cocycles(1, w)
    B = cx.coboundaries(1, w)
    rank_B = linalg.rank(B)
    h1 = cx.cohomology(1, w).dim
    target = {k: -v for k, v in cx.to_vector(2, w, res.cocycle).items()}
    eps0 = cx.to_vector(1, w, res.particular_solution or {})
    action_ok = True
    diffs_ok = True
    for z in Z:
        s = dict(eps0)
        linalg.axpy(s, cx.scheme.field.one, z)
        if linalg.apply(cols, s) != target:
            action_ok = False
        # the difference of two solutions is closed
        if linalg.apply(cols, z):
            diffs_ok = False
    return TorsorReport(w, h1, len(Z), rank_B, action_ok, diffs_ok)


@dataclass
class Intertwiner:
    found: bool
    gamma: dict | None = None  # 0-cochain over A⁰
    verified: bool = False
    class_difference: int = 0  # dim of the span of the difference in H¹ (0 or 1)


def intertwiner(Fa: LocallyFreeModule, Fb: LocallyFreeModule, F0: LocallyFreeModule) -> Intertwiner:
    """Find ``g_i = 1 + t^n γ_i`` with ``g_i Psi^a_ij = Psi^b_ij phi(g_j)`` if the difference is exact."""
    n = Fa.ring.order - 1
    S = Fa.scheme
    cx = EndChainComplex(F0)
    w = wscale(-n, S.ring.t_weight)
    eps = {}
    for key in Fa.gluings:
        diff = [[add_into(dict(x), y, -S.field.one) for x, y in zip(r1, r2)]
                for r1, r2 in zip(Fb.gluings[key], Fa.gluings[key])]
        E = _split_top(S.algebras[key[0]], F0.scheme.algebras[key[0]], diff, n, "difference")
        if not _is_zero(E):
            eps[key] = E
    vec = cx.to_vector(1, w, eps)
    sol = linalg.solve(cx.differential(0, w), vec) if vec else {}
    if sol is None:
        return Intertwiner(False, class_difference=1)
    c = cx.from_vector(0, w, sol)
    gamma = {ch: scalar_matrix(M, -S.field.one) for ch, M in c.items()}
    ok = True
    for (i, j) in S.poset.relations():
        A = S.algebras[i]
        g_i = _one_plus(A, Fa.rank, gamma.get((i,)), n)
        g_j = _one_plus(S.algebras[j], Fa.rank, gamma.get((j,)), n)
        lhs = matrix_mul(A, g_i, Fa.psi(i, j))
        rhs = matrix_mul(A, Fb.psi(i, j), matrix_apply_hom(S.phi(i, j), g_j))
        if lhs != rhs:
            ok = False
            break
    return Intertwiner(True, gamma, ok)


def _one_plus(A, r, gamma, n):
    I = [[A.one() if a == b else {} for b in range(r)] for a in range(r)]
    return I if gamma is None else matrix_add(I, _embed_top(A, gamma, n))


def random_lift(F: LocallyFreeModule, target: NcScheme, rng: random.Random, density: float = 0.5,
                scale: int = 3) -> LocallyFreeModule:
    """The canonical lift plus ``t^n`` times random homogeneous matrices (for lift-independence tests)."""
    lift = lift_gluing(F, target)
    n = F.ring.order
    w = wscale(-n, target.ring.t_weight)
    S0 = target  # coefficients live in degree 0 of t; build the perturbation over A⁰-words
    gl = {}
    for (i, j), M in lift.gluings.items():
        A = target.algebras[i]
        sp = MatrixSpace(A, lift.shifts[i], lift.shifts[j], w)
        pert = zero_matrix(lift.rank, lift.rank)
        for idx, (a, b, (word, jj)) in enumerate(sp.keys):
            if jj == 0 and rng.random() < density:
                c = rng.randint(-scale, scale)
                if c:
                    add_into(pert[a][b], {(word, n): target.field(c)})
        gl[(i, j)] = matrix_add(M, pert)
    return LocallyFreeModule(F.name, S0, F.rank, F.shifts, gl)


def lift_difference(la: LocallyFreeModule, lb: LocallyFreeModule, n: int) -> dict:
    """``(Psi^b - Psi^a) / t^n`` as a 1-cochain over ``A⁰`` (same words)."""
    S = la.scheme
    out = {}
    for key in la.gluings:
        diff = [[add_into(dict(x), y, -S.field.one) for x, y in zip(r1, r2)]
                for r1, r2 in zip(lb.gluings[key], la.gluings[key])]
        E = [[{(word, 0): c for (word, j), c in e.items()} for e in row] for row in diff]
        if not _is_zero(E):
            out[key] = E
    return out


# ---------------------------------------------------------------------------
# the whole tower


@dataclass
class LevelResult:
    level: int
    obstruction: ObstructionResult
    certificate: ExtensionCertificate | None
    torsor: TorsorReport | None
    choice: list | None = None

    def to_json(self, cx: EndChainComplex) -> dict:
        out = {"from_level": self.level, "to_level": self.level + 1,
               "obstruction": self.obstruction.to_json(cx)}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        if self.torsor is not None:
            out["torsor"] = self.torsor.to_json()
        if self.choice is not None:
            out["h1_choice"] = [str(c) for c in self.choice]
        return out


@dataclass
class TowerRun:
    levels: list
    module: LocallyFreeModule  # the last successfully constructed level
    obstructed_level: int | None
    flatness: dict = dc_field(default_factory=dict)
    complex: EndChainComplex | None = None

    @property
    def success(self) -> bool:
        return self.obstructed_level is None

    def to_json(self) -> dict:
        return {"success": self.success, "obstructed_level": self.obstructed_level,
                "top_order": self.module.ring.order,
                "levels": [lv.to_json(self.complex) for lv in self.levels],
                "final_module": self.module.to_json(), "flatness_surrogate": self.flatness}


def run_tower(T: DeformationTower, F0: LocallyFreeModule, window: Window | None = None,
              choices: dict | None = None, flatness: bool = True) -> TowerRun:
    """Lift → obstruction → solve from level 1 upward.

    ``choices[n]`` (a list of coefficients) adds that combination of the
    ``H¹`` basis to the particular solution when going from level ``n``.
    """
    if F0.scheme is not T.level(1):
        F0 = transport(F0, T.level(1))
    F = F0
    out = []
    cx = EndChainComplex(F0)
    obstructed = None
    for n in range(1, T.top):
        res, lift, _ = obstruction(F, T.level(n + 1), F0)
        res, cert = solve_extension(res, cx, lift)
        if cert is None:
            out.append(LevelResult(n, res, None, None))
            obstructed = n + 1
            break
        tors = torsor_structure(res, cx)
        choice = (choices or {}).get(n)
        if choice:
            eps = {ch: [row[:] for row in M] for ch, M in res.particular_solution.items()}
            for coef, h in zip(choice, res.h1_basis):
                for ch, M in h.items():
                    base = eps.get(ch, zero_matrix(F0.rank, F0.rank))
                    eps[ch] = matrix_add(base, scalar_matrix(M, T.level(1).field(coef)))
            cert = apply_correction(lift, eps, n)
        cert.verify(F)
        out.append(LevelResult(n, res, cert, tors, choice))
        F = cert.module
    run = TowerRun(out, F, obstructed, complex=cx)
    if flatness and window is not None:
        run.flatness = hom_flatness_surrogate(F0, F, window)
    return run


def hom_flatness_surrogate(F0: LocallyFreeModule, F: LocallyFreeModule, window: Window) -> dict:
    """Compare ``dim Hom(F, F)_w`` with ``sum_{j<n} dim Hom(F⁰, F⁰)_{w - j wt}`` on the window."""
    from .cech import HomComplex

    n = F.ring.order
    wt = F.ring.t_weight
    ext_window = window.extend(wscale(-1, wt), n - 1) if any(wt) else window
    base = HomComplex(F0, F0).hom_space(ext_window).dims()
    top = HomComplex(F, F).hom_space(window).dims()
    rows = []
    ok = True
    for w in window.weights():
        expect = sum(base.get(wadd(w, wscale(-j, wt)), 0) for j in range(n))
        rows.append({"weight": format_weight(w), "dim": top[w], "expected": expect})
        ok = ok and top[w] == expect
    return {"multiplicative": ok, "order": n, "table": rows, "notes": ["window-relative result"]}
