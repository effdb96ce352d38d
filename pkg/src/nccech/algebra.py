"""Graded finitely presented algebras over k[t]/(t^n) and homomorphisms between them."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

from .coeff import Weight, wsub, wscale, wadd
from .rewrite import RewriteSystem, RewriteRule, deglex_key
from . import linalg

DEFAULT_LENGTH_CAP = 16


def add_into(acc: dict, expr: dict, scale=None) -> dict:
    for k, c in expr.items():
        v = c if scale is None else scale * c
        s = acc.get(k)
        s = v if s is None else s + v
        if s:
            acc[k] = s
        else:
            acc.pop(k, None)
    return acc


def scale_combo(c, expr: dict) -> dict:
    if not c:
        return {}
    return {k: c * v for k, v in expr.items()}


class GradedAlgebra:
    """``k[t]/(t^n)<letters> / (rules)`` with a confluent homogeneous presentation."""

    def __init__(self, name: str, system: RewriteSystem, length_cap: int = DEFAULT_LENGTH_CAP):
        self.name = name
        self.system = system
        self.length_cap = length_cap
        self.cap_hits = set()
        self._nf_word = lru_cache(maxsize=None)(self._nf_word_uncached)
        self._words = {}

    def __repr__(self):
        return "GradedAlgebra(%s, order=%d)" % (self.name, self.ring.order)

    @property
    def ring(self):
        return self.system.ring

    @property
    def field(self):
        return self.system.ring.field

    @property
    def rank(self) -> int:
        return self.system.rank

    @property
    def alphabet(self):
        return self.system.alphabet

    def truncate(self, order: int) -> "GradedAlgebra":
        return GradedAlgebra(self.name, self.system.truncate(order), self.length_cap)

    def with_cap(self, length_cap: int) -> "GradedAlgebra":
        return GradedAlgebra(self.name, self.system, length_cap)

    # -- element arithmetic on raw combinations -----------------------------

    def one(self) -> dict:
        return {("", 0): self.field.one}

    def _nf_word_uncached(self, word: str) -> dict:
        return self.system.normal_form({(word, 0): self.field.one})

    def nf(self, expr: dict) -> dict:
        out = {}
        n = self.ring.order
        for (w, j), c in expr.items():
            if j >= n or not c:
                continue
            if j == 0:
                add_into(out, self._nf_word(w), c)
            else:
                add_into(out, {(ww, jj + j): cc for (ww, jj), cc in self._nf_word(w).items() if jj + j < n}, c)
        return out

    def mul(self, a: dict, b: dict) -> dict:
        n = self.ring.order
        out = {}
        for (wa, ja), ca in a.items():
            for (wb, jb), cb in b.items():
                j = ja + jb
                if j >= n:
                    continue
                for (w, jj), c in self._nf_word(wa + wb).items():
                    if j + jj < n:
                        add_into(out, {(w, j + jj): c}, ca * cb)
        return out

    def times_t(self, a: dict, k: int = 1) -> dict:
        n = self.ring.order
        return {(w, j + k): c for (w, j), c in a.items() if j + k < n}

    def weight_of(self, word: str, j: int = 0) -> Weight:
        return self.system.term_weight(word, j)

    def homogeneous_weight(self, expr: dict):
        """The common weight of all terms, or ``None`` if ``expr`` is zero or inhomogeneous."""
        ws = {self.weight_of(w, j) for (w, j) in expr}
        return ws.pop() if len(ws) == 1 else None

    def is_homogeneous_of(self, expr: dict, weight: Weight) -> bool:
        return all(self.weight_of(w, j) == tuple(weight) for (w, j) in expr)

    def parse(self, text: str) -> dict:
        return self.system.parse(text)

    def format(self, expr: dict) -> str:
        return self.system.format(expr)

    def element(self, value) -> "AlgebraElement":
        if isinstance(value, str):
            value = self.parse(value)
        else:
            value = self.nf(value)
        return AlgebraElement(self, value)

    # -- graded pieces -------------------------------------------------------

    def normal_words(self, weight: Weight) -> list:
        weight = tuple(weight)
        got = self._words.get(weight)
        if got is None:
            got, hit = self.system.enumerate_normal_words(weight, self.length_cap)
            if hit:
                self.cap_hits.add(weight)
            self._words[weight] = got
        return got

    def graded_basis(self, weight: Weight) -> list:
        """k-basis of the weight piece: pairs ``(word, j)`` standing for ``t^j * word``."""
        out = []
        tw = self.ring.t_weight
        for j in range(self.ring.order):
            for w in self.normal_words(wsub(tuple(weight), wscale(j, tw))):
                out.append((w, j))
        return out


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    parent: GradedAlgebra
    value: dict = dc_field(default_factory=dict)

    def _check(self, other):
        if not isinstance(other, AlgebraElement):
            raise TypeError("expected an AlgebraElement")
        if other.parent is not self.parent:
            raise ValueError("elements of different algebras (%s, %s)" % (self.parent.name, other.parent.name))

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, add_into(dict(self.value), other.value))

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, add_into(dict(self.value), other.value, -self.parent.field.one))

    def __neg__(self):
        return AlgebraElement(self.parent, scale_combo(-self.parent.field.one, self.value))

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return multiply(self, other)
        return AlgebraElement(self.parent, scale_combo(self.parent.field(other), self.value))

    def __rmul__(self, other):
        return AlgebraElement(self.parent, scale_combo(self.parent.field(other), self.value))

    def __eq__(self, other):
        if isinstance(other, AlgebraElement):
            return self.parent is other.parent and self.value == other.value
        if other == 0:
            return not self.value
        return NotImplemented

    def __hash__(self):
        return hash((id(self.parent), frozenset(self.value.items())))

    def is_zero(self) -> bool:
        return not self.value

    @property
    def weight(self):
        return self.parent.homogeneous_weight(self.value)

    def __str__(self):
        return self.parent.format(self.value)

    __repr__ = __str__


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    a._check(b)
    return AlgebraElement(a.parent, a.parent.mul(a.value, b.value))


def graded_basis(A: GradedAlgebra, weight: Weight):
    """``(R-basis words, k-basis pairs)`` of the weight piece of ``A``."""
    return A.normal_words(weight), A.graded_basis(weight)


@dataclass
class HomReport:
    weight_errors: list = dc_field(default_factory=list)  # letters whose image has the wrong weight
    failed_rules: list = dc_field(default_factory=list)  # (rule string, normal form of the difference)

    @property
    def valid(self) -> bool:
        return not self.weight_errors and not self.failed_rules


class AlgebraHom:
    """An R-algebra map given by images of generators."""

    def __init__(self, source: GradedAlgebra, target: GradedAlgebra, images: dict):
        if source.ring != target.ring:
            raise ValueError("homomorphism between algebras over different rings")
        self.source = source
        self.target = target
        alpha = source.alphabet
        imgs = {}
        for letter, img in images.items():
            ch = letter if len(letter) == 1 and ord(letter) >= 0x100 else alpha.char(letter)
            if isinstance(img, str):
                img = target.parse(img)
            elif isinstance(img, AlgebraElement):
                img = img.value
            else:
                img = target.nf(img)
            imgs[ch] = img
        missing = [alpha.letters[i] for i in range(len(alpha.letters)) if chr(0x100 + i) not in imgs]
        if missing:
            raise ValueError("no image given for letters %s" % ", ".join(missing))
        self.images = imgs
        self._word_cache = {"": target.one()}

    @classmethod
    def identity(cls, A: GradedAlgebra) -> "AlgebraHom":
        return cls(A, A, {chr(0x100 + i): {(chr(0x100 + i), 0): A.field.one} for i in range(len(A.alphabet.letters))})

    def image_of_word(self, word: str) -> dict:
        got = self._word_cache.get(word)
        if got is None:
            got = self.target.mul(self.image_of_word(word[:-1]), self.images[word[-1]])
            self._word_cache[word] = got
        return got

    def apply(self, expr: dict) -> dict:
        out = {}
        T = self.target
        for (w, j), c in expr.items():
            img = self.image_of_word(w)
            if j:
                img = T.times_t(img, j)
            add_into(out, img, c)
        return out

    def __call__(self, x):
        if isinstance(x, AlgebraElement):
            if x.parent is not self.source:
                raise ValueError("element not in the source algebra")
            return AlgebraElement(self.target, self.apply(x.value))
        return self.apply(x)

    def format_images(self) -> dict:
        alpha = self.source.alphabet
        return {alpha.name(ch): self.target.format(img) for ch, img in sorted(self.images.items())}

    def truncate(self, source: GradedAlgebra, target: GradedAlgebra) -> "AlgebraHom":
        n = target.ring.order
        return AlgebraHom(source, target, {ch: {(w, j): c for (w, j), c in img.items() if j < n}
                                           for ch, img in self.images.items()})


def check_hom(h: AlgebraHom, max_weight: int | None = None) -> HomReport:
    """Weight preservation of the generator images and vanishing of every relation image."""
    rep = HomReport()
    S, T = h.source, h.target
    for ch, img in sorted(h.images.items()):
        lw = S.weight_of(ch)
        if img and not T.is_homogeneous_of(img, lw):
            rep.weight_errors.append(S.alphabet.name(ch))
    for rule in S.system.rules:
        if max_weight is not None and sum(S.weight_of(rule.lhs)) > max_weight:
            continue
        diff = h.apply({(rule.lhs, 0): S.field.one})
        add_into(diff, h.apply(rule.rhs_dict()), -S.field.one)
        if diff:
            rep.failed_rules.append((S.system.format_rule(rule), T.format(diff)))
    return rep


def compose_hom(g: AlgebraHom, h: AlgebraHom) -> AlgebraHom:
    """``g o h`` (apply ``h`` first)."""
    if h.target is not g.source:
        raise ValueError("cannot compose: %s -> %s then %s -> %s"
                         % (h.source.name, h.target.name, g.source.name, g.target.name))
    return AlgebraHom(h.source, g.target, {ch: g.apply(img) for ch, img in h.images.items()})


def homs_equal(g: AlgebraHom, h: AlgebraHom) -> bool:
    return g.source is h.source and g.target is h.target and g.images == h.images


def build_algebra(name: str, letters, rules, ring, length_cap: int = DEFAULT_LENGTH_CAP) -> GradedAlgebra:
    """Convenience constructor: ``letters`` as ``[(name, weight)]``, ``rules`` as ``["lhs -> rhs"]``."""
    from .rewrite import Alphabet, parse_combination

    alpha = Alphabet.from_pairs((n, tuple(w) if not isinstance(w, int) else (w,)) for n, w in letters)
    parsed = []
    for r in rules:
        lhs, _, rhs = r.partition("->")
        lhs_combo = parse_combination(lhs, alpha, ring)
        if len(lhs_combo) != 1:
            raise ValueError("rule lhs must be a single word: %r" % r)
        (word, j), c = next(iter(lhs_combo.items()))
        if j or c != 1:
            raise ValueError("rule lhs must be a bare word: %r" % r)
        parsed.append(RewriteRule.make(word, parse_combination(rhs, alpha, ring)))
    return GradedAlgebra(name, RewriteSystem(alpha, parsed, ring), length_cap)


def matrix_mul(A: GradedAlgebra, X, Y):
    n, m, p = len(X), len(Y), len(Y[0]) if Y else 0
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = {}
            for k in range(m):
                if X[i][k] and Y[k][j]:
                    add_into(acc, A.mul(X[i][k], Y[k][j]))
            row.append(acc)
        out.append(row)
    return out


def matrix_apply_hom(h: AlgebraHom, X):
    return [[h.apply(e) for e in row] for row in X]


def identity_matrix(A: GradedAlgebra, r: int):
    return [[A.one() if i == j else {} for j in range(r)] for i in range(r)]


def matrix_sub(X, Y, field):
    return [[add_into(dict(a), b, -field.one) for a, b in zip(ra, rb)] for ra, rb in zip(X, Y)]


def invert_matrix(A: GradedAlgebra, M, weights_of_inverse=None, search_weights=None):
    """Two-sided inverse of a square matrix over ``A``, searched degree-wise.

    ``weights_of_inverse[b][a]`` fixes the weight of each unknown entry (the
    homogeneous case); otherwise every weight in ``search_weights`` is allowed.
    Returns ``None`` when no inverse exists with entries in the searched pieces.
    """
    r = len(M)
    field = A.field
    unknowns = []  # (row, col, word, j)
    for b in range(r):
        for a in range(r):
            ws = [weights_of_inverse[b][a]] if weights_of_inverse is not None else list(search_weights)
            for w in ws:
                for key in A.graded_basis(w):
                    unknowns.append((b, a, key))
    # right inverse: M * U = I ; equation index (i, a, word, j)
    eq_index = {}
    cols = []
    for (b, a, key) in unknowns:
        col = {}
        for i in range(r):
            if not M[i][b]:
                continue
            prod = A.mul(M[i][b], {key: field.one})
            for k2, c in prod.items():
                idx = eq_index.setdefault((i, a, k2), len(eq_index))
                col[idx] = col.get(idx, field.zero) + c
        cols.append({k: v for k, v in col.items() if v})
    target = {}
    for i in range(r):
        idx = eq_index.setdefault((i, i, ("", 0)), len(eq_index))
        target[idx] = field.one
    sol = linalg.solve(cols, target)
    if sol is None:
        return None
    U = [[{} for _ in range(r)] for _ in range(r)]
    for k, c in sol.items():
        b, a, key = unknowns[k]
        add_into(U[b][a], {key: c})
    # left inverse check
    left = matrix_mul(A, U, M)
    if left != identity_matrix(A, r):
        return None
    return U
