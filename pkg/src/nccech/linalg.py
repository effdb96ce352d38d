"""Exact sparse linear algebra over a :class:`~nccech.coeff.Field`.

Vectors are ``dict[int, coeff]`` with no zero entries.  The workhorse is
:class:`Echelon`, an incrementally maintained reduced row echelon basis which
also remembers how each of its rows was built from the vectors fed to it.
Pivots are always the smallest surviving index, so results are reproducible.
"""

from __future__ import annotations


def axpy(y: dict, a, x: dict) -> None:
    """y += a*x in place."""
    for k, v in x.items():
        s = y.get(k)
        s = a * v if s is None else s + a * v
        if s:
            y[k] = s
        else:
            y.pop(k, None)


def scaled(a, x: dict) -> dict:
    if not a:
        return {}
    return {k: a * v for k, v in x.items()}


class Echelon:
    """Reduced echelon basis of a growing subspace.

    ``add(v, tag)`` inserts ``v``.  If ``v`` already lies in the span it is not
    inserted and the returned dict expresses ``v`` through earlier tags;
    otherwise ``None`` is returned.
    """

    def __init__(self):
        self.rows = {}  # pivot -> (vec, expr)
        self.order = []  # pivots in insertion order

    def __len__(self):
        return len(self.rows)

    @property
    def pivots(self):
        return sorted(self.rows)

    def reduce(self, v: dict):
        """Return ``(remainder, expr)`` with ``v = remainder + sum expr[tag]*orig[tag]``."""
        r = dict(v)
        expr = {}
        for p in [k for k in r if k in self.rows]:
            c = r.get(p)
            if not c:
                continue
            vec, e = self.rows[p]
            axpy(r, -c, vec)
            axpy(expr, c, e)
        return r, expr

    def contains(self, v: dict) -> bool:
        return not self.reduce(v)[0]

    def add(self, v: dict, tag=None):
        r, expr = self.reduce(v)
        if not r:
            return expr
        # r = v - sum expr*orig, so the new row in terms of originals is:
        e = {k: -c for k, c in expr.items()}
        if tag is not None:
            axpy(e, 1, {tag: 1})
        p = min(r)
        inv = 1 / r[p]
        r = scaled(inv, r)
        e = scaled(inv, e)
        for q, (vec, ex) in list(self.rows.items()):
            c = vec.get(p)
            if c:
                vec = dict(vec)
                ex = dict(ex)
                axpy(vec, -c, r)
                axpy(ex, -c, e)
                self.rows[q] = (vec, ex)
        self.rows[p] = (r, e)
        self.order.append(p)
        return None


def rank(vectors) -> int:
    ech = Echelon()
    for v in vectors:
        ech.add(v)
    return len(ech)


def kernel(columns, one=1) -> list:
    """Basis of ``{x : sum x[i] * columns[i] = 0}`` as sparse vectors over column indices."""
    ech = Echelon()
    out = []
    for i, col in enumerate(columns):
        dep = ech.add(col, tag=i)
        if dep is not None:
            vec = {i: one}
            for k, c in dep.items():
                axpy(vec, -c, {k: one})
            out.append(vec)
    return out


def image_basis(columns) -> list:
    ech = Echelon()
    for col in columns:
        ech.add(col)
    return [ech.rows[p][0] for p in ech.pivots]


def solve(columns, target: dict):
    """Some ``x`` with ``sum x[i]*columns[i] == target``, or ``None``."""
    ech = Echelon()
    for i, col in enumerate(columns):
        ech.add(col, tag=i)
    r, expr = ech.reduce(target)
    if r:
        return None
    return {k: c for k, c in expr.items() if c}


def apply(columns, x: dict) -> dict:
    out = {}
    for i, c in x.items():
        axpy(out, c, columns[i])
    return out


class Quotient:
    """A subquotient ``Z / B`` with a fixed basis of representatives.

    ``reps`` are elements of ``Z`` whose classes form a basis of ``Z/B``;
    ``coords(v)`` gives the class of ``v`` (assumed in ``Z``) in that basis.
    """

    def __init__(self, cycles, boundaries):
        self.ech = Echelon()
        for j, b in enumerate(boundaries):
            self.ech.add(b, tag=("b", j))
        self.reps = []
        for z in cycles:
            if self.ech.add(z, tag=("z", len(self.reps))) is None:
                self.reps.append(z)
        self.dim = len(self.reps)

    def coords(self, v: dict):
        r, expr = self.ech.reduce(v)
        if r:
            raise ValueError("vector is not a cycle of this subquotient")
        return {tag[1]: c for tag, c in expr.items() if tag[0] == "z" and c}


# ---- small dense helpers -------------------------------------------------


def identity(n: int, field) -> list:
    return [[field.one if i == j else field.zero for j in range(n)] for i in range(n)]


def matmul(a, b) -> list:
    if not a:
        return []
    m, k, n = len(a), len(b), len(b[0]) if b else 0
    out = []
    for i in range(m):
        row = []
        for j in range(n):
            s = 0
            for l in range(k):
                if a[i][l] and b[l][j]:
                    s = s + a[i][l] * b[l][j]
            row.append(s)
        out.append(row)
    return out


def rank_dense(rows) -> int:
    return rank({j: c for j, c in enumerate(row) if c} for row in rows)


def dense_to_columns(rows) -> list:
    if not rows:
        return []
    n = len(rows[0])
    return [{i: rows[i][j] for i in range(len(rows)) if rows[i][j]} for j in range(n)]
